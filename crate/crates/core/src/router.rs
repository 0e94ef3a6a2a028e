//! A small baseline layout synthesizer: initial placement followed by
//! shortest-path SWAP insertion, with gates kept in input order and each one
//! scheduled as soon as its qubits are free.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, Operands};
use crate::device::DeviceGraph;
use crate::schedule::{Mapping, ScheduleError, ScheduledCircuit, ScheduledGate, Space};

pub const DEFAULT_MONOMORPHISM_NODES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Placement {
    Identity,
    DegreeGreedy,
    #[default]
    MonomorphismTry,
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Placement::Identity),
            "degree-greedy" => Ok(Placement::DegreeGreedy),
            "monomorphism-try" | "monomorphism" => Ok(Placement::MonomorphismTry),
            other => Err(format!(
                "unknown placement `{other}` (expected identity, degree-greedy or monomorphism-try)"
            )),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Identity => "identity",
            Placement::DegreeGreedy => "degree-greedy",
            Placement::MonomorphismTry => "monomorphism-try",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouterConfig {
    pub placement: Placement,
    /// Number of upcoming two-qubit gates whose distances break ties between
    /// candidate SWAPs.
    pub lookahead: usize,
    /// Shuffles the root candidates of the embedding search.
    pub seed: u64,
    /// Search nodes allowed before falling back to degree-greedy placement.
    pub max_monomorphism_nodes: usize,
}

impl Default for RouterConfig {
    fn default() -> Self {
        Self {
            placement: Placement::default(),
            lookahead: 4,
            seed: 0,
            max_monomorphism_nodes: DEFAULT_MONOMORPHISM_NODES,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RouteError {
    #[error("circuit needs {logical} qubits but the device has {physical}")]
    TooManyQubits { logical: usize, physical: usize },
    #[error("gate {gate}: physical qubits p{from} and p{to} are not connected")]
    Unroutable { gate: usize, from: usize, to: usize },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Logical-qubit interaction graph of a circuit's two-qubit gates.
struct Interactions {
    arcs: HashSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    weight: Vec<usize>,
}

impl Interactions {
    fn new(c: &Circuit) -> Self {
        let n = c.num_qubits();
        let mut arcs = HashSet::new();
        let mut neighbors = vec![Vec::new(); n];
        let mut weight = vec![0; n];
        for g in c.gates() {
            if let Operands::Two(a, b) = g.operands {
                weight[a] += 1;
                weight[b] += 1;
                if arcs.insert((a, b)) && !arcs.contains(&(b, a)) {
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Self { arcs, neighbors, weight }
    }
}

/// Busiest logical qubits onto the best-connected physical qubits.
fn degree_greedy(c: &Circuit, device: &DeviceGraph, inter: &Interactions) -> Vec<usize> {
    let mut logical: Vec<usize> = (0..c.num_qubits()).collect();
    logical.sort_by_key(|&q| (std::cmp::Reverse(inter.weight[q]), q));
    let mut physical: Vec<usize> = (0..device.num_qubits()).collect();
    physical.sort_by_key(|&p| (std::cmp::Reverse(device.degree(p)), p));
    let mut map = vec![0; c.num_qubits()];
    for (q, p) in logical.into_iter().zip(physical) {
        map[q] = p;
    }
    map
}

struct Embedder<'a> {
    device: &'a DeviceGraph,
    inter: &'a Interactions,
    order: Vec<usize>,
    /// For each position in `order`, the earlier positions' logical
    /// neighbours.
    back: Vec<Vec<usize>>,
    phys: Vec<Option<usize>>,
    used: Vec<bool>,
    roots: Vec<usize>,
    nodes: usize,
    budget: usize,
}

impl Embedder<'_> {
    fn fits(&self, q: usize, p: usize, back: &[usize]) -> bool {
        if self.used[p] || self.device.degree(p) < self.inter.neighbors[q].len() {
            return false;
        }
        back.iter().all(|&r| {
            let pr = self.phys[r].unwrap();
            (!self.inter.arcs.contains(&(q, r)) || self.device.has_edge(p, pr))
                && (!self.inter.arcs.contains(&(r, q)) || self.device.has_edge(pr, p))
        })
    }

    /// `Some(true)` on success, `Some(false)` when this branch is exhausted,
    /// `None` once the node budget runs out.
    fn search(&mut self, k: usize) -> Option<bool> {
        if k == self.order.len() {
            return Some(true);
        }
        let q = self.order[k];
        let back = std::mem::take(&mut self.back[k]);
        let candidates: Vec<usize> = match back.first() {
            Some(&r) => self.device.undirected_neighbors(self.phys[r].unwrap()).to_vec(),
            None => self.roots.clone(),
        };
        let mut result = Some(false);
        for p in candidates {
            if !self.fits(q, p, &back) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                result = None;
                break;
            }
            self.phys[q] = Some(p);
            self.used[p] = true;
            match self.search(k + 1) {
                Some(false) => {
                    self.phys[q] = None;
                    self.used[p] = false;
                }
                other => {
                    result = other;
                    break;
                }
            }
        }
        self.back[k] = back;
        result
    }
}

/// Look for an injection under which every two-qubit gate lands on a device
/// edge with the right orientation.
fn monomorphism(c: &Circuit, device: &DeviceGraph, inter: &Interactions, cfg: &RouterConfig) -> Option<Vec<usize>> {
    let n = c.num_qubits();
    let active: Vec<usize> = (0..n).filter(|&q| !inter.neighbors[q].is_empty()).collect();
    // connectivity order: most already-ordered neighbours, then degree
    let mut order: Vec<usize> = Vec::with_capacity(active.len());
    let mut placed = vec![false; n];
    while order.len() < active.len() {
        let q = *active
            .iter()
            .filter(|&&q| !placed[q])
            .max_by_key(|&&q| {
                let linked = inter.neighbors[q].iter().filter(|&&r| placed[r]).count();
                (linked, inter.neighbors[q].len(), std::cmp::Reverse(q))
            })
            .unwrap();
        placed[q] = true;
        order.push(q);
    }
    let position: Vec<Option<usize>> = {
        let mut pos = vec![None; n];
        for (i, &q) in order.iter().enumerate() {
            pos[q] = Some(i);
        }
        pos
    };
    let back = order
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            inter.neighbors[q]
                .iter()
                .copied()
                .filter(|&r| position[r].is_some_and(|j| j < i))
                .collect()
        })
        .collect();
    let mut roots: Vec<usize> = (0..device.num_qubits()).collect();
    roots.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut e = Embedder {
        device,
        inter,
        order,
        back,
        phys: vec![None; n],
        used: vec![false; device.num_qubits()],
        roots,
        nodes: 0,
        budget: cfg.max_monomorphism_nodes,
    };
    if e.search(0) != Some(true) {
        return None;
    }
    let mut free = (0..device.num_qubits()).filter(|&p| !e.used[p]);
    Some(
        e.phys
            .iter()
            .map(|p| p.unwrap_or_else(|| free.next().unwrap()))
            .collect(),
    )
}

/// Choose an initial mapping for `c` on `device`.
pub fn place(c: &Circuit, device: &DeviceGraph, cfg: &RouterConfig) -> Result<Mapping, RouteError> {
    if c.num_qubits() > device.num_qubits() {
        return Err(RouteError::TooManyQubits {
            logical: c.num_qubits(),
            physical: device.num_qubits(),
        });
    }
    let inter = Interactions::new(c);
    let map = match cfg.placement {
        Placement::Identity => (0..c.num_qubits()).collect(),
        Placement::DegreeGreedy => degree_greedy(c, device, &inter),
        Placement::MonomorphismTry => {
            monomorphism(c, device, &inter, cfg).unwrap_or_else(|| degree_greedy(c, device, &inter))
        }
    };
    Ok(Mapping::new(map)?)
}

/// Whether the embedding search finds a SWAP-free placement within budget.
pub fn find_monomorphism(c: &Circuit, device: &DeviceGraph, cfg: &RouterConfig) -> Option<Mapping> {
    if c.num_qubits() > device.num_qubits() {
        return None;
    }
    let inter = Interactions::new(c);
    monomorphism(c, device, &inter, cfg).map(|m| Mapping::new(m).expect("embedding is injective"))
}

struct State {
    to_physical: Vec<usize>,
    holder: Vec<Option<usize>>,
    busy: Vec<usize>,
    gates: Vec<ScheduledGate>,
}

impl State {
    fn emit(&mut self, space: Space, label: &str, is_swap: bool) {
        let t = space.qubits().map(|p| self.busy[p]).max().unwrap() + 1;
        for p in space.qubits() {
            self.busy[p] = t;
        }
        self.gates.push(ScheduledGate {
            time: t,
            space,
            label: label.to_string(),
            is_swap,
        });
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.emit(Space::Edge(a, b), "swap", true);
        self.holder.swap(a, b);
        for p in [a, b] {
            if let Some(q) = self.holder[p] {
                self.to_physical[q] = p;
            }
        }
    }
}

/// Route `c` from `initial` on `device`, inserting SWAPs where a two-qubit
/// gate's operands are not adjacent.
pub fn route(
    c: &Circuit,
    initial: &Mapping,
    device: &DeviceGraph,
    cfg: &RouterConfig,
) -> Result<ScheduledCircuit, RouteError> {
    if initial.len() < c.num_qubits() {
        return Err(ScheduleError::MappingTooSmall {
            mapped: initial.len(),
            needed: c.num_qubits(),
        }
        .into());
    }
    if let Some(&qubit) = initial.as_slice().iter().find(|&&p| p >= device.num_qubits()) {
        return Err(ScheduleError::UnknownQubit {
            qubit,
            num_qubits: device.num_qubits(),
        }
        .into());
    }
    let dist = device.distance_matrix();
    let two_qubit: Vec<usize> = c
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.arity() == 2)
        .map(|(i, _)| i)
        .collect();
    let mut st = State {
        to_physical: initial.as_slice().to_vec(),
        holder: initial.inverse(device.num_qubits()),
        busy: vec![0; device.num_qubits()],
        gates: Vec::with_capacity(c.len()),
    };
    let mut next_two = 0;
    for (i, g) in c.gates().iter().enumerate() {
        let (a, b) = match g.operands {
            Operands::One(q) => {
                st.emit(Space::Qubit(st.to_physical[q]), &g.label, false);
                continue;
            }
            Operands::Two(a, b) => (a, b),
        };
        next_two += 1;
        let upcoming = &two_qubit[next_two..(next_two + cfg.lookahead).min(two_qubit.len())];
        loop {
            let (pa, pb) = (st.to_physical[a], st.to_physical[b]);
            if device.has_edge(pa, pb) {
                break;
            }
            if device.coupled(pa, pb) {
                // only the reverse direction exists; trade places
                st.swap(pa.min(pb), pa.max(pb));
                continue;
            }
            let path = device.shortest_path(pa, pb).ok_or(RouteError::Unroutable {
                gate: i,
                from: pa,
                to: pb,
            })?;
            let k = path.len() - 1;
            let options = [(path[0], path[1]), (path[k - 1], path[k])];
            let score = |(x, y): (usize, usize)| {
                let at = |q: usize| {
                    let p = st.to_physical[q];
                    if p == x {
                        y
                    } else if p == y {
                        x
                    } else {
                        p
                    }
                };
                let total: usize = upcoming
                    .iter()
                    .map(|&j| match c.gates()[j].operands {
                        Operands::Two(u, v) => dist[at(u)][at(v)].min(device.num_qubits()),
                        Operands::One(_) => 0,
                    })
                    .sum();
                (total, x.min(y), x.max(y))
            };
            let (x, y) = options.into_iter().min_by_key(|&o| score(o)).unwrap();
            st.swap(x.min(y), x.max(y));
        }
        let space = Space::Edge(st.to_physical[a], st.to_physical[b]);
        st.emit(space, &g.label, false);
    }
    Ok(ScheduledCircuit {
        initial_mapping: initial.clone(),
        gates: st.gates,
    })
}
