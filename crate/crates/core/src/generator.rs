//! QUEKO benchmark construction.
//!
//! A benchmark is built directly in spacetime on the device: a backbone of
//! `T` gates where each one shares a qubit with the previous one (so the
//! dependency chain has length `T`), then more gates sprinkled into free
//! `(cycle, qubit)` slots, then a random relabeling of physical qubits to
//! logical ones. Undoing the relabeling gives a SWAP-free schedule of depth
//! `T`, and the backbone shows no schedule can be shorter.
//!
//! Every random choice is drawn from a [`ChaCha8Rng`] seeded with
//! [`GenSpec::seed`]. Each attempt uses three independent streams
//! (`3·attempt + phase`), so output is reproducible across platforms.
//!
//! An attempt that runs out of feasible placements is retried from scratch.
//! The first half of the retry budget picks gate arity uniformly; the second
//! half places two-qubit gates whenever one fits, which rescues targets whose
//! two-qubit count sits at the device's per-cycle capacity.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{format_ratio, Circuit, Gate, GateDensity};
use crate::device::{matching_bound, DeviceGraph, MatchingBound, DEFAULT_MATCHING_BUDGET};
use crate::schedule::{Mapping, ScheduleError, ScheduledCircuit, ScheduledGate, Space};

pub const DEFAULT_RETRY_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub device: DeviceGraph,
    pub depth_target: usize,
    pub density: GateDensity,
    pub seed: u64,
    pub retry_limit: usize,
}

impl GenSpec {
    pub fn new(device: DeviceGraph, depth_target: usize, density: GateDensity, seed: u64) -> Self {
        Self {
            device,
            depth_target,
            density,
            seed,
            retry_limit: DEFAULT_RETRY_LIMIT,
        }
    }

    /// `<device>_<T>cyc_<d1>_<d2>_<seed>`; a `/` in a fractional density
    /// becomes `-` to keep the name a single path component.
    pub fn file_stem(&self) -> String {
        let r = |x: Ratio<u64>| format_ratio(x).replace('/', "-");
        format!(
            "{}_{}cyc_{}_{}_{}",
            self.device.name(),
            self.depth_target,
            r(self.density.d1()),
            r(self.density.d2()),
            self.seed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlacedGate {
    pub time: usize,
    pub space: Space,
}

impl PlacedGate {
    pub fn arity(&self) -> usize {
        self.space.arity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// `M1 + M2 < T`: too few gates for a chain of length `T`.
    TooFewGates,
    /// `M1 + 2·M2 > N·T`: more qubit-slots requested than exist.
    TooManySlots,
    /// `M2 > u·T`: every cycle would need more two-qubit gates than some
    /// maximal matching allows.
    TooManyTwoQubitGates,
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Predicate::TooFewGates => "M1 + M2 < T",
            Predicate::TooManySlots => "M1 + 2*M2 > N*T",
            Predicate::TooManyTwoQubitGates => "M2 > u*T",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("not admissible ({predicate}) with M1={m1}, M2={m2}, N={num_qubits}, T={depth}, u={bound}")]
pub struct Rejection {
    pub predicate: Predicate,
    pub m1: usize,
    pub m2: usize,
    pub num_qubits: usize,
    pub depth: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Backbone,
    Sprinkle,
    Scramble,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Backbone => "backbone",
            Phase::Sprinkle => "sprinkle",
            Phase::Scramble => "scramble",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("depth target must be at least 1")]
    ZeroDepth,
    #[error("retry limit must be at least 1")]
    ZeroRetryLimit,
    #[error(transparent)]
    NotAdmissible(#[from] Rejection),
    #[error("gave up after {attempts} attempts; last dead end in the {phase} phase")]
    RetriesExhausted { attempts: usize, phase: Phase },
}

/// A dead end inside one attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeadEnd(pub Phase);

fn ceil_times(r: Ratio<u64>, k: u64, div: u64) -> usize {
    let num = *r.numer() as u128 * k as u128;
    let den = *r.denom() as u128 * div as u128;
    num.div_ceil(den) as usize
}

/// Target gate counts `M1 = ceil(d1·N·T)`, `M2 = ceil(d2·N·T/2)`, computed
/// exactly.
pub fn target_counts(spec: &GenSpec) -> (usize, usize) {
    let slots = (spec.device.num_qubits() * spec.depth_target) as u64;
    (
        ceil_times(spec.density.d1(), slots, 1),
        ceil_times(spec.density.d2(), slots, 2),
    )
}

pub fn check_admissible(spec: &GenSpec, u: MatchingBound) -> Result<(usize, usize), Rejection> {
    let (m1, m2) = target_counts(spec);
    let n = spec.device.num_qubits();
    let t = spec.depth_target;
    let reject = |predicate| Rejection {
        predicate,
        m1,
        m2,
        num_qubits: n,
        depth: t,
        bound: u.value,
    };
    if m1 + m2 < t {
        Err(reject(Predicate::TooFewGates))
    } else if m1 + 2 * m2 > n * t {
        Err(reject(Predicate::TooManySlots))
    } else if m2 > u.value * t {
        Err(reject(Predicate::TooManyTwoQubitGates))
    } else {
        Ok((m1, m2))
    }
}

/// Occupancy of the `T × N` slot grid with per-cycle counts of free qubits
/// and free (both endpoints idle) edges.
struct Slots<'a> {
    device: &'a DeviceGraph,
    incident: Vec<Vec<usize>>,
    busy: Vec<bool>,
    free_nodes: Vec<usize>,
    free_edges: Vec<usize>,
}

impl<'a> Slots<'a> {
    fn new(device: &'a DeviceGraph, depth: usize) -> Self {
        let n = device.num_qubits();
        let mut incident = vec![Vec::new(); n];
        for (i, &(a, b)) in device.edges().iter().enumerate() {
            incident[a].push(i);
            incident[b].push(i);
        }
        Self {
            device,
            incident,
            busy: vec![false; n * depth],
            free_nodes: vec![n; depth],
            free_edges: vec![device.edges().len(); depth],
        }
    }

    fn is_busy(&self, t: usize, p: usize) -> bool {
        self.busy[(t - 1) * self.device.num_qubits() + p]
    }

    fn occupy(&mut self, t: usize, p: usize) {
        debug_assert!(!self.is_busy(t, p));
        self.busy[(t - 1) * self.device.num_qubits() + p] = true;
        self.free_nodes[t - 1] -= 1;
        for &e in &self.incident[p] {
            let (a, b) = self.device.edges()[e];
            let other = if a == p { b } else { a };
            if !self.is_busy(t, other) {
                self.free_edges[t - 1] -= 1;
            }
        }
    }

    fn place(&mut self, g: PlacedGate) {
        for p in g.space.qubits() {
            self.occupy(g.time, p);
        }
    }

    fn edge_free(&self, t: usize, e: usize) -> bool {
        let (a, b) = self.device.edges()[e];
        !self.is_busy(t, a) && !self.is_busy(t, b)
    }

    /// Uniform free `(cycle, qubit)` slot.
    fn sample_node(&self, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        let t = pick_weighted(&self.free_nodes, rng)?;
        let k = rng.gen_range(0..self.free_nodes[t - 1]);
        let p = (0..self.device.num_qubits())
            .filter(|&p| !self.is_busy(t, p))
            .nth(k)
            .unwrap();
        Some((t, p))
    }

    /// Uniform `(cycle, edge)` with both endpoints free.
    fn sample_edge(&self, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        let t = pick_weighted(&self.free_edges, rng)?;
        let k = rng.gen_range(0..self.free_edges[t - 1]);
        let e = (0..self.device.edges().len())
            .filter(|&e| self.edge_free(t, e))
            .nth(k)
            .unwrap();
        Some((t, e))
    }
}

/// Index (1-based) drawn with probability proportional to `weights`.
fn pick_weighted(weights: &[usize], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: usize = weights.iter().sum();
    if total == 0 {
        return None;
    }
    let mut k = rng.gen_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if k < w {
            return Some(i + 1);
        }
        k -= w;
    }
    unreachable!()
}

/// Ordered space for edge `e`: the stored orientation on directed devices,
/// a fair coin otherwise.
fn orient(device: &DeviceGraph, e: usize, rng: &mut ChaCha8Rng) -> Space {
    let (a, b) = device.edges()[e];
    if device.is_directed() || rng.gen::<bool>() {
        Space::Edge(a, b)
    } else {
        Space::Edge(b, a)
    }
}

/// How an attempt chooses between one- and two-qubit gates when both fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ArityPolicy {
    /// A fair coin.
    #[default]
    Uniform,
    /// Always a two-qubit gate.
    TwoQubitFirst,
}

impl ArityPolicy {
    /// Policy used by attempt `attempt` (0-based) out of `limit`.
    pub fn for_attempt(attempt: usize, limit: usize) -> Self {
        if attempt < limit.div_ceil(2) {
            ArityPolicy::Uniform
        } else {
            ArityPolicy::TwoQubitFirst
        }
    }
}

/// Pick an arity among those that still have quota and a feasible
/// placement.
fn pick_arity(one: bool, two: bool, policy: ArityPolicy, rng: &mut ChaCha8Rng) -> Option<usize> {
    match (one, two) {
        (true, true) if policy == ArityPolicy::TwoQubitFirst => Some(2),
        (true, true) => Some(if rng.gen::<bool>() { 1 } else { 2 }),
        (true, false) => Some(1),
        (false, true) => Some(2),
        (false, false) => None,
    }
}

/// Counts of placed single- and two-qubit gates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub m1: usize,
    pub m2: usize,
}

/// Grow a chain of `T` gates, one per cycle, each sharing a physical qubit
/// with its predecessor.
pub fn build_backbone(
    device: &DeviceGraph,
    depth: usize,
    m1: usize,
    m2: usize,
    policy: ArityPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<PlacedGate>, Counters), DeadEnd> {
    let n = device.num_qubits();
    let mut incident = vec![Vec::new(); n];
    for (i, &(a, b)) in device.edges().iter().enumerate() {
        incident[a].push(i);
        incident[b].push(i);
    }
    let mut counters = Counters::default();
    let mut chain: Vec<PlacedGate> = Vec::with_capacity(depth);
    for t in 1..=depth {
        let (nodes, edges): (Vec<usize>, Vec<usize>) = match chain.last() {
            None => ((0..n).collect(), (0..device.edges().len()).collect()),
            Some(prev) => {
                let nodes: Vec<usize> = prev.space.qubits().collect();
                let mut edges: Vec<usize> = nodes.iter().flat_map(|&p| incident[p].iter().copied()).collect();
                edges.sort_unstable();
                edges.dedup();
                (nodes, edges)
            }
        };
        let one = counters.m1 < m1 && !nodes.is_empty();
        let two = counters.m2 < m2 && !edges.is_empty();
        let space = match pick_arity(one, two, policy, rng).ok_or(DeadEnd(Phase::Backbone))? {
            1 => {
                counters.m1 += 1;
                Space::Qubit(*nodes.choose(rng).unwrap())
            }
            _ => {
                counters.m2 += 1;
                orient(device, *edges.choose(rng).unwrap(), rng)
            }
        };
        chain.push(PlacedGate { time: t, space });
    }
    Ok((chain, counters))
}

/// Fill free slots until the counts reach `M1` and `M2`. Returns only the
/// added gates.
#[allow(clippy::too_many_arguments)]
pub fn sprinkle(
    device: &DeviceGraph,
    depth: usize,
    backbone: &[PlacedGate],
    m1: usize,
    m2: usize,
    counters: Counters,
    policy: ArityPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PlacedGate>, DeadEnd> {
    let mut slots = Slots::new(device, depth);
    for &g in backbone {
        slots.place(g);
    }
    let (mut r1, mut r2) = (m1 - counters.m1, m2 - counters.m2);
    let mut added = Vec::with_capacity(r1 + r2);
    while r1 + r2 > 0 {
        let one = r1 > 0 && slots.free_nodes.iter().any(|&k| k > 0);
        let two = r2 > 0 && slots.free_edges.iter().any(|&k| k > 0);
        let g = match pick_arity(one, two, policy, rng).ok_or(DeadEnd(Phase::Sprinkle))? {
            1 => {
                r1 -= 1;
                let (time, p) = slots.sample_node(rng).unwrap();
                PlacedGate {
                    time,
                    space: Space::Qubit(p),
                }
            }
            _ => {
                r2 -= 1;
                let (time, e) = slots.sample_edge(rng).unwrap();
                PlacedGate {
                    time,
                    space: orient(device, e, rng),
                }
            }
        };
        slots.place(g);
        added.push(g);
    }
    Ok(added)
}

/// Everything needed to reproduce and certify a generated benchmark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSidecar {
    pub spec: GenSpec,
    /// `scramble_map[p]` is the logical qubit placed on physical qubit `p`.
    pub scramble_map: Vec<usize>,
    pub optimal_depth: usize,
    pub m1: usize,
    pub m2: usize,
    /// 1-based attempt that succeeded.
    pub attempt: usize,
    /// Placed gates in the same order as the output circuit.
    pub placed_gates: Vec<PlacedGate>,
}

/// Relabel physical qubits with a uniform random permutation and sort by
/// `(cycle, lowest logical operand)`. Returns the circuit, `τ`, and the
/// placed gates in output order.
pub fn scramble(
    num_qubits: usize,
    placed: &[PlacedGate],
    rng: &mut ChaCha8Rng,
) -> (Circuit, Vec<usize>, Vec<PlacedGate>) {
    let mut tau: Vec<usize> = (0..num_qubits).collect();
    tau.shuffle(rng);
    let logical = |g: &PlacedGate| match g.space {
        Space::Qubit(p) => Gate::one("x", tau[p]),
        Space::Edge(a, b) => Gate::two("cx", tau[a], tau[b]).expect("edge endpoints are distinct"),
    };
    let mut keyed: Vec<(usize, usize, PlacedGate, Gate)> = placed
        .iter()
        .map(|g| {
            let lg = logical(g);
            (g.time, lg.operands.min(), *g, lg)
        })
        .collect();
    keyed.sort_by_key(|k| (k.0, k.1));
    let (order, gates): (Vec<PlacedGate>, Vec<Gate>) = keyed.into_iter().map(|(_, _, p, g)| (p, g)).unzip();
    let circuit = Circuit::new(num_qubits, gates).expect("placed gates are on device qubits");
    (circuit, tau, order)
}

fn phase_rng(seed: u64, attempt: usize, phase: Phase) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3 * attempt as u64 + phase as u64);
    rng
}

/// Generate a benchmark, computing the matching bound of the device first.
pub fn generate(spec: &GenSpec) -> Result<(Circuit, SolutionSidecar), GenError> {
    generate_with_bound(spec, matching_bound(&spec.device, DEFAULT_MATCHING_BUDGET))
}

/// Generate a benchmark with a precomputed matching bound (useful when many
/// specs share one device).
pub fn generate_with_bound(spec: &GenSpec, u: MatchingBound) -> Result<(Circuit, SolutionSidecar), GenError> {
    if spec.depth_target == 0 {
        return Err(GenError::ZeroDepth);
    }
    if spec.retry_limit == 0 {
        return Err(GenError::ZeroRetryLimit);
    }
    let (m1, m2) = check_admissible(spec, u)?;
    let t = spec.depth_target;
    let mut last = Phase::Backbone;
    for attempt in 0..spec.retry_limit {
        let policy = ArityPolicy::for_attempt(attempt, spec.retry_limit);
        let mut rng = phase_rng(spec.seed, attempt, Phase::Backbone);
        let (backbone, counters) = match build_backbone(&spec.device, t, m1, m2, policy, &mut rng) {
            Ok(b) => b,
            Err(DeadEnd(p)) => {
                last = p;
                continue;
            }
        };
        let mut rng = phase_rng(spec.seed, attempt, Phase::Sprinkle);
        let extra = match sprinkle(&spec.device, t, &backbone, m1, m2, counters, policy, &mut rng) {
            Ok(e) => e,
            Err(DeadEnd(p)) => {
                last = p;
                continue;
            }
        };
        let mut placed = backbone;
        placed.extend(extra);
        let mut rng = phase_rng(spec.seed, attempt, Phase::Scramble);
        let (circuit, tau, order) = scramble(spec.device.num_qubits(), &placed, &mut rng);
        let sidecar = SolutionSidecar {
            spec: spec.clone(),
            scramble_map: tau,
            optimal_depth: t,
            m1,
            m2,
            attempt: attempt + 1,
            placed_gates: order,
        };
        return Ok((circuit, sidecar));
    }
    Err(GenError::RetriesExhausted {
        attempts: spec.retry_limit,
        phase: last,
    })
}

impl SolutionSidecar {
    pub fn optimal_gate_count(&self) -> usize {
        self.m1 + self.m2
    }

    /// `μ0 = τ⁻¹`: logical qubit `q` starts on the physical qubit `p` with
    /// `τ(p) = q`.
    pub fn initial_mapping(&self) -> Mapping {
        let mut inv = vec![0; self.scramble_map.len()];
        for (p, &q) in self.scramble_map.iter().enumerate() {
            inv[q] = p;
        }
        Mapping::new(inv).expect("scramble map is a permutation")
    }

    /// The certifying schedule: every output gate at its placed cycle.
    pub fn to_schedule(&self) -> ScheduledCircuit {
        let gates = self
            .placed_gates
            .iter()
            .map(|g| ScheduledGate::new(g.time, g.space, if g.arity() == 1 { "x" } else { "cx" }))
            .collect();
        ScheduledCircuit {
            initial_mapping: self.initial_mapping(),
            gates,
        }
    }

    /// Check that this sidecar describes `circuit` gate for gate.
    pub fn matches(&self, circuit: &Circuit) -> Result<(), ScheduleError> {
        let mismatch = |m: String| Err(ScheduleError::SidecarMismatch(m));
        if circuit.num_qubits() != self.scramble_map.len() {
            return mismatch(format!(
                "circuit has {} qubits, sidecar {}",
                circuit.num_qubits(),
                self.scramble_map.len()
            ));
        }
        if circuit.len() != self.placed_gates.len() {
            return mismatch(format!(
                "circuit has {} gates, sidecar {}",
                circuit.len(),
                self.placed_gates.len()
            ));
        }
        let tau = &self.scramble_map;
        for (i, (g, p)) in circuit.gates().iter().zip(&self.placed_gates).enumerate() {
            let expect = match p.space {
                Space::Qubit(a) => crate::circuit::Operands::One(tau[a]),
                Space::Edge(a, b) => crate::circuit::Operands::Two(tau[a], tau[b]),
            };
            if g.operands != expect {
                return mismatch(format!("gate {i} is {g}, sidecar places it on {}", p.space));
            }
        }
        Ok(())
    }

    /// Key-value text form; see [`SolutionSidecar::from_str`].
    pub fn to_text(&self) -> String {
        let d = &self.spec.device;
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        out.push_str(&format!("device = {}\n", d.name()));
        out.push_str(&format!("qubits = {}\n", d.num_qubits()));
        out.push_str(&format!("directed = {}\n", d.is_directed()));
        out.push_str(&format!(
            "edges = {}\n",
            join(&mut d.edges().iter().map(|(a, b)| format!("{a}-{b}")))
        ));
        out.push_str(&format!("depth = {}\n", self.optimal_depth));
        out.push_str(&format!("m1 = {}\n", self.m1));
        out.push_str(&format!("m2 = {}\n", self.m2));
        out.push_str(&format!("gate_count = {}\n", self.optimal_gate_count()));
        out.push_str(&format!("density = {}\n", self.spec.density));
        out.push_str(&format!("seed = {}\n", self.spec.seed));
        out.push_str(&format!("retry_limit = {}\n", self.spec.retry_limit));
        out.push_str(&format!("attempt = {}\n", self.attempt));
        out.push_str(&format!(
            "tau = {}\n",
            join(&mut self.scramble_map.iter().map(|q| q.to_string()))
        ));
        out.push_str("[gates]\n");
        for g in &self.placed_gates {
            match g.space {
                Space::Qubit(p) => out.push_str(&format!("{} {p}\n", g.time)),
                Space::Edge(a, b) => out.push_str(&format!("{} {a} {b}\n", g.time)),
            }
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("sidecar line {line}: {message}")]
pub struct SidecarError {
    pub line: usize,
    pub message: String,
}

impl FromStr for SolutionSidecar {
    type Err = SidecarError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        use std::collections::HashMap;
        let mut keys: HashMap<&str, (usize, &str)> = HashMap::new();
        let mut placed = Vec::new();
        let mut in_gates = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| SidecarError { line, message };
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if s == "[gates]" {
                in_gates = true;
                continue;
            }
            if in_gates {
                let nums = s
                    .split_whitespace()
                    .map(str::parse::<usize>)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err(format!("invalid gate row `{s}`")))?;
                let g = match nums.as_slice() {
                    [t, p] => PlacedGate {
                        time: *t,
                        space: Space::Qubit(*p),
                    },
                    [t, a, b] => PlacedGate {
                        time: *t,
                        space: Space::Edge(*a, *b),
                    },
                    _ => return Err(err(format!("gate rows are `t p` or `t p p'`, found `{s}`"))),
                };
                placed.push(g);
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{s}`")))?;
            if keys.insert(k.trim(), (line, v.trim())).is_some() {
                return Err(err(format!("duplicate key `{}`", k.trim())));
            }
        }
        let get = |k: &str| {
            keys.get(k).copied().ok_or(SidecarError {
                line: 0,
                message: format!("missing key `{k}`"),
            })
        };
        fn num<T: FromStr>(entry: (usize, &str), what: &str) -> Result<T, SidecarError> {
            entry.1.parse().map_err(|_| SidecarError {
                line: entry.0,
                message: format!("invalid {what} `{}`", entry.1),
            })
        }
        let name = get("device")?.1;
        let n: usize = num(get("qubits")?, "qubit count")?;
        let directed: bool = num(get("directed")?, "directed flag")?;
        let (eline, etext) = get("edges")?;
        let edges = etext
            .split_whitespace()
            .map(|e| {
                let (a, b) = e.split_once('-')?;
                Some((a.parse().ok()?, b.parse().ok()?))
            })
            .collect::<Option<Vec<(usize, usize)>>>()
            .ok_or(SidecarError {
                line: eline,
                message: "edges are `a-b` pairs".into(),
            })?;
        let device = DeviceGraph::new(name, n, edges, directed).map_err(|e| SidecarError {
            line: eline,
            message: e.to_string(),
        })?;
        let (dline, dtext) = get("density")?;
        let density = GateDensity::parse(dtext).map_err(|e| SidecarError {
            line: dline,
            message: e.to_string(),
        })?;
        let depth: usize = num(get("depth")?, "depth")?;
        let m1 = num(get("m1")?, "m1")?;
        let m2 = num(get("m2")?, "m2")?;
        let (tline, ttext) = get("tau")?;
        let tau = ttext
            .split_whitespace()
            .map(str::parse::<usize>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| SidecarError {
                line: tline,
                message: "tau is a list of qubit indices".into(),
            })?;
        let mut sorted = tau.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(SidecarError {
                line: tline,
                message: format!("tau is not a permutation of 0..{n}"),
            });
        }
        let sidecar = SolutionSidecar {
            spec: GenSpec {
                device,
                depth_target: depth,
                density,
                seed: num(get("seed")?, "seed")?,
                retry_limit: num(get("retry_limit")?, "retry limit")?,
            },
            scramble_map: tau,
            optimal_depth: depth,
            m1,
            m2,
            attempt: num(get("attempt")?, "attempt")?,
            placed_gates: placed,
        };
        if let Ok(entry) = get("gate_count") {
            let count: usize = num(entry, "gate count")?;
            if count != m1 + m2 {
                return Err(SidecarError {
                    line: entry.0,
                    message: format!("gate_count {count} is not m1 + m2 = {}", m1 + m2),
                });
            }
        }
        if sidecar.placed_gates.len() != m1 + m2 {
            return Err(SidecarError {
                line: 0,
                message: format!("{} gate rows but m1 + m2 = {}", sidecar.placed_gates.len(), m1 + m2),
            });
        }
        Ok(sidecar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_ratio;
    use crate::schedule::{asap_schedule, verify, Asap, VerifyOptions};

    fn exact(value: usize) -> MatchingBound {
        MatchingBound { value, exact: true }
    }

    fn density(d1: &str, d2: &str) -> GateDensity {
        GateDensity::new(parse_ratio(d1).unwrap(), parse_ratio(d2).unwrap()).unwrap()
    }

    fn ourense() -> DeviceGraph {
        DeviceGraph::builtin("ourense").unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let spec = GenSpec::new(ourense(), 3, GateDensity::qse(), 0);
        assert_eq!(check_admissible(&spec, exact(1)), Ok((8, 3)));

        let spec = GenSpec::new(ourense(), 10, density("0", "0"), 0);
        assert_eq!(
            check_admissible(&spec, exact(1)).unwrap_err().predicate,
            Predicate::TooFewGates
        );

        let lonely = DeviceGraph::new("lonely", 3, vec![], false).unwrap();
        let spec = GenSpec::new(lonely, 4, density("0.5", "0.1"), 0);
        assert_eq!(
            check_admissible(&spec, exact(0)).unwrap_err().predicate,
            Predicate::TooManyTwoQubitGates
        );

        let spec = GenSpec::new(ourense(), 3, density("0.4", "0.6"), 0);
        assert_eq!(
            check_admissible(&spec, exact(2)).unwrap_err().predicate,
            Predicate::TooManySlots
        );
    }

    #[test]
    fn counts_use_exact_arithmetic() {
        // 0.51 * 20 * 45 = 459 exactly; a float product lands just above it
        let spec = GenSpec::new(DeviceGraph::grid(5, 4), 45, GateDensity::qse(), 0);
        assert_eq!(target_counts(&spec), (459, 180));
    }

    #[test]
    fn edgeless_single_qubit_backbone() {
        let dev = DeviceGraph::new("one", 1, vec![], false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (chain, c) = build_backbone(&dev, 3, 3, 0, ArityPolicy::Uniform, &mut rng).unwrap();
        assert_eq!(c, Counters { m1: 3, m2: 0 });
        assert!(chain.iter().all(|g| g.space == Space::Qubit(0)));
        assert_eq!(
            build_backbone(&dev, 3, 2, 0, ArityPolicy::Uniform, &mut rng),
            Err(DeadEnd(Phase::Backbone))
        );
    }

    #[test]
    fn saturated_target_fills_every_slot() {
        let spec = GenSpec::new(DeviceGraph::grid(2, 3), 4, density("1", "0"), 5);
        let (c, side) = generate(&spec).unwrap();
        assert_eq!(c.len(), 24);
        let mut slots: Vec<(usize, usize)> = side
            .placed_gates
            .iter()
            .map(|g| (g.time, g.space.min()))
            .collect();
        slots.sort_unstable();
        slots.dedup();
        assert_eq!(slots.len(), 24);
    }

    #[test]
    fn minimal_target_adds_nothing() {
        // M1 + M2 = T: only a backbone
        let spec = GenSpec::new(ourense(), 5, density("0.2", "0"), 1);
        let (c, side) = generate(&spec).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(side.placed_gates.iter().map(|g| g.time).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn identity_scramble_is_a_relabeling() {
        let placed = vec![
            PlacedGate { time: 1, space: Space::Edge(0, 1) },
            PlacedGate { time: 2, space: Space::Qubit(1) },
            PlacedGate { time: 3, space: Space::Edge(1, 2) },
        ];
        // find a seed whose shuffle of three labels is the identity
        let (circuit, tau, order) = (0..)
            .map(|s| scramble(3, &placed, &mut ChaCha8Rng::seed_from_u64(s)))
            .find(|(_, tau, _)| tau == &vec![0, 1, 2])
            .unwrap();
        assert_eq!(tau, vec![0, 1, 2]);
        assert_eq!(order, placed);
        assert_eq!(circuit.gates().iter().map(|g| g.to_string()).collect::<Vec<_>>(), vec!["cx q0,q1", "x q1", "cx q1,q2"]);
    }

    #[test]
    fn generated_instance_is_certified() {
        for (dev, d) in [(ourense(), GateDensity::tfl()), (DeviceGraph::grid(4, 4), GateDensity::qse())] {
            let spec = GenSpec::new(dev.clone(), 15, d, 3);
            let (c, side) = generate(&spec).unwrap();
            assert_eq!(c.counts(), (side.m1, side.m2));
            assert_eq!(c.dependency_profile().longest_chain, 15);
            side.matches(&c).unwrap();
            let r = verify(&dev, &side.to_schedule(), &c, VerifyOptions::default()).unwrap();
            assert!(r.valid, "{:?}", r.violation);
            assert_eq!((r.depth, r.inserted_swap_count), (15, 0));
            let Asap::Feasible(asap) = asap_schedule(&c, &side.initial_mapping(), &dev).unwrap() else {
                panic!("sidecar mapping must be swap-free");
            };
            assert_eq!(asap.depth(), 15);
        }
    }

    #[test]
    fn determinism_and_sidecar_round_trip() {
        let spec = GenSpec::new(DeviceGraph::builtin("tokyo").unwrap(), 20, GateDensity::qse(), 11);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        let other = generate(&GenSpec { seed: 12, ..spec.clone() }).unwrap();
        assert_ne!(a.0, other.0);
        let text = a.1.to_text();
        let back: SolutionSidecar = text.parse().unwrap();
        assert_eq!(back, a.1);
        assert_eq!(back.to_text(), text);
        assert_eq!(spec.file_stem(), "tokyo_20cyc_0.51_0.4_11");
    }

    #[test]
    fn sidecar_mismatch_is_detected() {
        let spec = GenSpec::new(ourense(), 5, GateDensity::tfl(), 2);
        let (c, side) = generate(&spec).unwrap();
        let other = generate(&GenSpec { seed: 3, ..spec }).unwrap().0;
        assert!(side.matches(&c).is_ok());
        assert!(matches!(side.matches(&other), Err(ScheduleError::SidecarMismatch(_))));
    }

    #[test]
    fn capacity_bound_targets_fall_back_to_two_qubit_first() {
        // a star fits one two-qubit gate per cycle; 26 of them in 27 cycles
        // leaves almost no room for a centre single-qubit gate
        let spec = GenSpec::new(DeviceGraph::star(6), 27, density("0.17", "0.31"), 0);
        assert_eq!(target_counts(&spec), (28, 26));
        let (c, side) = generate(&spec).unwrap();
        assert!(side.attempt > DEFAULT_RETRY_LIMIT / 2);
        assert_eq!(c.dependency_profile().longest_chain, 27);
        assert_eq!(ArityPolicy::for_attempt(0, 1), ArityPolicy::Uniform);
        assert_eq!(ArityPolicy::for_attempt(1, 2), ArityPolicy::TwoQubitFirst);
    }

    #[test]
    fn directed_devices_keep_orientation() {
        let dev = DeviceGraph::new("dline", 4, vec![(0, 1), (2, 1), (2, 3)], true).unwrap();
        let spec = GenSpec::new(dev.clone(), 10, density("0.3", "0.4"), 9);
        let (c, side) = generate(&spec).unwrap();
        for g in &side.placed_gates {
            if let Space::Edge(a, b) = g.space {
                assert!(dev.has_edge(a, b));
            }
        }
        assert!(verify(&dev, &side.to_schedule(), &c, VerifyOptions::default()).unwrap().valid);
    }

    #[test]
    fn malformed_sidecars() {
        let spec = GenSpec::new(ourense(), 3, GateDensity::tfl(), 2);
        let text = generate(&spec).unwrap().1.to_text();
        let bad_tau = text.replace("tau = ", "tau = 0 ");
        assert!(bad_tau.parse::<SolutionSidecar>().is_err());
        let dropped: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(dropped.parse::<SolutionSidecar>().is_err());
        let no_seed: String = text.lines().filter(|l| !l.starts_with("seed")).map(|l| format!("{l}\n")).collect();
        assert!(no_seed.parse::<SolutionSidecar>().unwrap_err().message.contains("seed"));
    }
}
