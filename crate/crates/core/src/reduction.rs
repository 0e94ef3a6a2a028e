//! Hamiltonian cycle → depth-decision layout synthesis.
//!
//! For a graph on `N` vertices the instance has `N` levels. Level `k`
//! (0-based) holds `cx(q_k, q_{(k+1) mod N})` followed by an `x` on every
//! other qubit, so each qubit carries exactly one gate per level and every
//! gate in level `k` ends a dependency chain of length `k + 1`. A schedule of
//! depth `N` cannot afford any SWAP, so it exists iff some fixed mapping
//! puts all `N` CX gates on edges, i.e. iff the graph has a Hamiltonian
//! cycle.

use itertools::Itertools;
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::device::DeviceGraph;
use crate::schedule::{asap_schedule, Asap, Mapping};

pub const DEFAULT_HC_LIMIT: usize = 12;
pub const DEFAULT_DEPTH_LIMIT: usize = 9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("the reduction needs at least 3 vertices, got {0}")]
    TooSmall(usize),
    #[error("{vertices} vertices exceeds the brute-force limit of {limit}")]
    LimitExceeded { vertices: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionInstance {
    pub source_graph: DeviceGraph,
    pub circuit: Circuit,
    pub depth_bound: usize,
}

pub fn build_reduction(g: &DeviceGraph) -> Result<ReductionInstance, ReductionError> {
    let n = g.num_qubits();
    if n < 3 {
        return Err(ReductionError::TooSmall(n));
    }
    let mut gates = Vec::with_capacity(n * (n - 1));
    for k in 0..n {
        let next = (k + 1) % n;
        gates.push(Gate::two("cx", k, next).expect("distinct for n >= 3"));
        gates.extend((0..n).filter(|&q| q != k && q != next).map(|q| Gate::one("x", q)));
    }
    Ok(ReductionInstance {
        source_graph: g.clone(),
        circuit: Circuit::new(n, gates).expect("valid by construction"),
        depth_bound: n,
    })
}

/// Backtracking search from vertex 0 over out-neighbours in ascending
/// order. Returns the cycle with its start repeated at the end.
pub fn hamiltonian_cycle_oracle(g: &DeviceGraph, limit: usize) -> Result<Option<Vec<usize>>, ReductionError> {
    let n = g.num_qubits();
    if n > limit {
        return Err(ReductionError::LimitExceeded { vertices: n, limit });
    }
    if n < 3 {
        return Ok(None);
    }
    fn extend(g: &DeviceGraph, path: &mut Vec<usize>, seen: &mut [bool]) -> bool {
        let last = *path.last().unwrap();
        if path.len() == g.num_qubits() {
            return g.has_edge(last, path[0]);
        }
        for &next in g.neighbors(last) {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            path.push(next);
            if extend(g, path, seen) {
                return true;
            }
            path.pop();
            seen[next] = false;
        }
        false
    }
    let mut path = vec![0];
    let mut seen = vec![false; n];
    seen[0] = true;
    Ok(extend(g, &mut path, &mut seen).then(|| {
        path.push(0);
        path
    }))
}

/// Whether some initial mapping schedules the instance SWAP-free within its
/// depth bound. Tries all `N!` bijections.
pub fn depth_decision_oracle(inst: &ReductionInstance, limit: usize) -> Result<bool, ReductionError> {
    let n = inst.source_graph.num_qubits();
    if n > limit {
        return Err(ReductionError::LimitExceeded { vertices: n, limit });
    }
    Ok((0..n).permutations(n).any(|perm| {
        certifies(inst, &Mapping::new(perm).expect("permutation"))
    }))
}

/// Whether `mapping` yields a schedule of depth at most the bound.
pub fn certifies(inst: &ReductionInstance, mapping: &Mapping) -> bool {
    match asap_schedule(&inst.circuit, mapping, &inst.source_graph) {
        Ok(Asap::Feasible(sc)) => sc.depth() <= inst.depth_bound,
        _ => false,
    }
}

/// The mapping `q_i ↦ p_i` read off a Hamiltonian cycle `(p_0, …, p_{N−1}, p_0)`.
pub fn mapping_from_cycle(cycle: &[usize]) -> Mapping {
    Mapping::new(cycle[..cycle.len() - 1].to_vec()).expect("a cycle visits each vertex once")
}
