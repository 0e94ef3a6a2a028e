//! Scheduled circuits and the checker for the layout-synthesis constraints.
//!
//! A [`ScheduledCircuit`] pairs an initial logical→physical [`Mapping`] with
//! gates placed at `(cycle, space)` coordinates. [`verify`] checks it against
//! the input circuit:
//!
//! 1. every two-qubit gate sits on a device edge;
//! 2. no physical qubit is used twice in one cycle;
//! 3. replaying the gates in time order (SWAPs permute the mapping), the
//!    pulled-back gates are exactly the input gates, and each one is at the
//!    head of the pending queue of every logical qubit it touches.
//!
//! Queue matching stands in for an explicit injection from input gates to
//! scheduled gates: since input order is never changed, a gate is matched to
//! the earliest pending input gate on its qubits or the schedule is invalid.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::circuit::{Circuit, Operands};
use crate::device::DeviceGraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("mapping is not injective: q{first} and q{second} both map to p{physical}")]
    NotInjective {
        first: usize,
        second: usize,
        physical: usize,
    },
    #[error("mapping covers {mapped} logical qubits but the circuit has {needed}")]
    MappingTooSmall { mapped: usize, needed: usize },
    #[error("physical qubit p{qubit} does not exist on a {num_qubits}-qubit device")]
    UnknownQubit { qubit: usize, num_qubits: usize },
    #[error("scheduled gate {index}: cycle numbers start at 1")]
    ZeroCycle { index: usize },
    #[error("scheduled gate {index}: two-qubit gate on a single physical qubit p{qubit}")]
    DegenerateEdge { index: usize, qubit: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("sidecar does not describe this benchmark: {0}")]
    SidecarMismatch(String),
    #[error("depth {depth} is below the known optimum {optimum}; the verifier or sidecar is broken")]
    BelowOptimum { depth: usize, optimum: usize },
}

/// Where a scheduled gate acts: one physical qubit or an ordered coupler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    Qubit(usize),
    Edge(usize, usize),
}

impl Space {
    pub fn arity(self) -> usize {
        match self {
            Space::Qubit(_) => 1,
            Space::Edge(..) => 2,
        }
    }

    pub fn qubits(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            Space::Qubit(a) => (a, None),
            Space::Edge(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn contains(self, p: usize) -> bool {
        self.qubits().any(|q| q == p)
    }

    pub fn overlaps(self, other: Space) -> bool {
        self.qubits().any(|q| other.contains(q))
    }

    pub fn min(self) -> usize {
        self.qubits().min().unwrap()
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Qubit(p) => write!(f, "p{p}"),
            Space::Edge(a, b) => write!(f, "p{a},p{b}"),
        }
    }
}

/// Injective assignment of logical qubits `0..len` to physical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    to_physical: Vec<usize>,
}

impl Mapping {
    pub fn new(to_physical: Vec<usize>) -> Result<Self, ScheduleError> {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for (q, &p) in to_physical.iter().enumerate() {
            if let Some(&first) = seen.get(&p) {
                return Err(ScheduleError::NotInjective {
                    first,
                    second: q,
                    physical: p,
                });
            }
            seen.insert(p, q);
        }
        Ok(Self { to_physical })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            to_physical: (0..n).collect(),
        }
    }

    pub fn physical(&self, q: usize) -> usize {
        self.to_physical[q]
    }

    pub fn len(&self) -> usize {
        self.to_physical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_physical.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.to_physical
    }

    /// Physical → logical lookup table over `num_physical` qubits.
    pub fn inverse(&self, num_physical: usize) -> Vec<Option<usize>> {
        let mut inv = vec![None; num_physical];
        for (q, &p) in self.to_physical.iter().enumerate() {
            inv[p] = Some(q);
        }
        inv
    }

    fn check_device(&self, device: &DeviceGraph) -> Result<(), ScheduleError> {
        match self.to_physical.iter().find(|&&p| p >= device.num_qubits()) {
            Some(&qubit) => Err(ScheduleError::UnknownQubit {
                qubit,
                num_qubits: device.num_qubits(),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, p) in self.to_physical.iter().enumerate() {
            if q > 0 {
                f.write_str(", ")?;
            }
            write!(f, "q{q}=p{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledGate {
    pub time: usize,
    pub space: Space,
    pub label: String,
    pub is_swap: bool,
}

impl ScheduledGate {
    pub fn new(time: usize, space: Space, label: impl Into<String>) -> Self {
        Self {
            time,
            space,
            label: label.into(),
            is_swap: false,
        }
    }

    pub fn swap(time: usize, a: usize, b: usize) -> Self {
        Self {
            time,
            space: Space::Edge(a, b),
            label: "swap".into(),
            is_swap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledCircuit {
    pub initial_mapping: Mapping,
    pub gates: Vec<ScheduledGate>,
}

impl ScheduledCircuit {
    /// Maximum cycle over all gates, 0 when empty.
    pub fn depth(&self) -> usize {
        self.gates.iter().map(|g| g.time).max().unwrap_or(0)
    }

    pub fn swap_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_swap).count()
    }

    /// Gate indices ordered by cycle, then lowest physical qubit. Independent
    /// of how same-cycle gates happen to be listed.
    fn time_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.gates.len()).collect();
        order.sort_by_key(|&i| (self.gates[i].time, self.gates[i].space.min(), i));
        order
    }

    /// Text exchange format: a `mapping:` header and one `cycle` row per gate.
    pub fn to_text(&self) -> String {
        let mut out = format!("mapping: {}\n", self.initial_mapping);
        for g in &self.gates {
            out.push_str(&format!("cycle {}: {} {}", g.time, g.label, g.space));
            if g.is_swap {
                out.push_str(" swap");
            }
            out.push('\n');
        }
        out
    }

    /// Parse the exchange format written by [`ScheduledCircuit::to_text`].
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ScheduleError> {
        let mut mapping = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| ScheduleError::Format { line, message };
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            if let Some(rest) = text.strip_prefix("mapping:") {
                if mapping.is_some() {
                    return Err(err("duplicate mapping header".into()));
                }
                mapping = Some(parse_mapping(rest).map_err(err)?);
                continue;
            }
            let rest = text
                .strip_prefix("cycle")
                .ok_or_else(|| err(format!("expected `cycle <t>: ...`, found `{text}`")))?;
            let (t, body) = rest
                .split_once(':')
                .ok_or_else(|| err("missing `:` after cycle number".into()))?;
            let time: usize = t
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid cycle `{}`", t.trim())))?;
            if time == 0 {
                return Err(err("cycle numbers start at 1".into()));
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let (label, operands, is_swap) = match fields.as_slice() {
                [label, ops] => (*label, *ops, false),
                [label, ops, "swap"] => (*label, *ops, true),
                _ => return Err(err(format!("expected `<label> p<a>[,p<b>] [swap]`, found `{}`", body.trim()))),
            };
            let qubits = operands
                .split(',')
                .map(|s| parse_indexed(s.trim(), 'p'))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err(format!("invalid operands `{operands}`")))?;
            let space = match qubits.as_slice() {
                [a] => Space::Qubit(*a),
                [a, b] => Space::Edge(*a, *b),
                _ => return Err(err("gates act on one or two physical qubits".into())),
            };
            if is_swap && space.arity() != 2 {
                return Err(err("a swap needs two qubits".into()));
            }
            gates.push(ScheduledGate {
                time,
                space,
                label: label.to_string(),
                is_swap,
            });
        }
        let initial_mapping = mapping.ok_or(ScheduleError::Format {
            line: 0,
            message: "missing `mapping:` header".into(),
        })?;
        Ok(Self {
            initial_mapping,
            gates,
        })
    }
}

fn parse_indexed(s: &str, prefix: char) -> Option<usize> {
    s.strip_prefix(prefix)?.parse().ok()
}

fn parse_mapping(s: &str) -> Result<Mapping, String> {
    let mut pairs = Vec::new();
    for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (q, p) = item
            .split_once('=')
            .ok_or_else(|| format!("expected `q<i>=p<j>`, found `{item}`"))?;
        let q = parse_indexed(q.trim(), 'q').ok_or_else(|| format!("invalid logical qubit `{q}`"))?;
        let p = parse_indexed(p.trim(), 'p').ok_or_else(|| format!("invalid physical qubit `{p}`"))?;
        pairs.push((q, p));
    }
    pairs.sort_unstable();
    let mut to_physical = Vec::with_capacity(pairs.len());
    for (expect, (q, p)) in pairs.into_iter().enumerate() {
        if q != expect {
            return Err(format!("mapping must list q0..q{} exactly once", expect));
        }
        to_physical.push(p);
    }
    Mapping::new(to_physical).map_err(|e| e.to_string())
}

/// Which constraint a schedule broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// A two-qubit gate is not on a device edge.
    InfeasibleTwoQubitGate,
    /// Two gates use the same physical qubit in the same cycle.
    SlotConflict,
    /// An input gate is never executed.
    MissingGate,
    /// A non-SWAP scheduled gate corresponds to no input gate.
    ExtraGate,
    /// A gate runs before an earlier input gate on one of its qubits.
    DependencyViolation,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::InfeasibleTwoQubitGate => "feasible-two-qubit-gates",
            ViolationKind::SlotConflict => "qubit-exclusivity",
            ViolationKind::MissingGate => "executing-all-gates (missing)",
            ViolationKind::ExtraGate => "executing-all-gates (extra)",
            ViolationKind::DependencyViolation => "respecting-dependencies",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Index into the scheduled gate list, when a scheduled gate is at fault.
    pub scheduled_gate: Option<usize>,
    /// Index into the input circuit, when an input gate is at fault.
    pub input_gate: Option<usize>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub valid: bool,
    /// Largest cycle number in the schedule as given.
    pub depth: usize,
    /// Depth once every explicit SWAP is expanded to three CX cycles.
    pub accounted_depth: usize,
    pub inserted_swap_count: usize,
    /// `scheduled gates − input gates`, counting a SWAP as one gate.
    pub added_gates: isize,
    pub depth_ratio: Option<Ratio<u64>>,
    pub violation: Option<Violation>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Treat `cx(a,b); cx(b,a); cx(a,b)` on one edge in consecutive cycles as
    /// a SWAP when none of the three is flagged. An input circuit that itself
    /// contains such a run is then misread, so this is off by default.
    pub detect_cx_swaps: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Regular,
    /// Last gate of a SWAP (or the whole SWAP); the mapping changes after it.
    SwapEnd,
    SwapPart,
}

fn check_space(device: &DeviceGraph, index: usize, g: &ScheduledGate) -> Result<(), ScheduleError> {
    if g.time == 0 {
        return Err(ScheduleError::ZeroCycle { index });
    }
    for p in g.space.qubits() {
        if p >= device.num_qubits() {
            return Err(ScheduleError::UnknownQubit {
                qubit: p,
                num_qubits: device.num_qubits(),
            });
        }
    }
    if let Space::Edge(a, b) = g.space {
        if a == b {
            return Err(ScheduleError::DegenerateEdge { index, qubit: a });
        }
    }
    Ok(())
}

fn is_cx(g: &ScheduledGate) -> bool {
    !g.is_swap && matches!(g.label.as_str(), "cx" | "cnot")
}

fn detect_swap_triples(sc: &ScheduledCircuit, roles: &mut [Role]) {
    let mut at: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, g) in sc.gates.iter().enumerate() {
        for p in g.space.qubits() {
            at.insert((g.time, p), i);
        }
    }
    for i in sc.time_order() {
        let g = &sc.gates[i];
        let Space::Edge(a, b) = g.space else { continue };
        if !is_cx(g) || roles[i] != Role::Regular {
            continue;
        }
        let same = |t: usize, want: (usize, usize)| {
            let j = *at.get(&(t, want.0))?;
            let h = &sc.gates[j];
            (h.space == Space::Edge(want.0, want.1) && is_cx(h) && roles[j] == Role::Regular).then_some(j)
        };
        if let (Some(j), Some(k)) = (same(g.time + 1, (b, a)), same(g.time + 2, (a, b))) {
            roles[i] = Role::SwapPart;
            roles[j] = Role::SwapPart;
            roles[k] = Role::SwapEnd;
        }
    }
}

/// Check `sc` against `input` on `device`.
///
/// Malformed input (unknown qubits, cycle 0, a mapping that does not cover
/// the circuit) is a hard error; constraint violations are reported in the
/// returned [`VerifyReport`].
pub fn verify(
    device: &DeviceGraph,
    sc: &ScheduledCircuit,
    input: &Circuit,
    opts: VerifyOptions,
) -> Result<VerifyReport, ScheduleError> {
    if sc.initial_mapping.len() < input.num_qubits() {
        return Err(ScheduleError::MappingTooSmall {
            mapped: sc.initial_mapping.len(),
            needed: input.num_qubits(),
        });
    }
    sc.initial_mapping.check_device(device)?;
    for (i, g) in sc.gates.iter().enumerate() {
        check_space(device, i, g)?;
    }

    let order = sc.time_order();
    let mut roles: Vec<Role> = sc
        .gates
        .iter()
        .map(|g| if g.is_swap { Role::SwapEnd } else { Role::Regular })
        .collect();
    if opts.detect_cx_swaps {
        detect_swap_triples(sc, &mut roles);
    }
    let swaps = roles.iter().filter(|r| **r == Role::SwapEnd).count();
    let regular = roles.iter().filter(|r| **r == Role::Regular).count();
    let mut report = VerifyReport {
        valid: false,
        depth: sc.depth(),
        accounted_depth: swap_depth_accounting(sc).depth(),
        inserted_swap_count: swaps,
        added_gates: (regular + swaps) as isize - input.len() as isize,
        depth_ratio: None,
        violation: None,
    };
    let fail = |mut report: VerifyReport, v: Violation| {
        report.violation = Some(v);
        Ok(report)
    };

    // feasible two-qubit gates
    for &i in &order {
        let g = &sc.gates[i];
        if let Space::Edge(a, b) = g.space {
            let ok = if g.is_swap {
                device.coupled(a, b)
            } else {
                device.has_edge(a, b)
            };
            if !ok {
                return fail(
                    report,
                    Violation {
                        kind: ViolationKind::InfeasibleTwoQubitGate,
                        scheduled_gate: Some(i),
                        input_gate: None,
                        reason: format!("cycle {}: ({a}, {b}) is not a device edge", g.time),
                    },
                );
            }
        }
    }

    // one gate per (cycle, physical qubit)
    let mut slots: HashMap<(usize, usize), usize> = HashMap::new();
    for &i in &order {
        let g = &sc.gates[i];
        for p in g.space.qubits() {
            if let Some(&j) = slots.get(&(g.time, p)) {
                return fail(
                    report,
                    Violation {
                        kind: ViolationKind::SlotConflict,
                        scheduled_gate: Some(i),
                        input_gate: None,
                        reason: format!("cycle {}: p{p} is also used by scheduled gate {j}", g.time),
                    },
                );
            }
            slots.insert((g.time, p), i);
        }
    }

    // replay the mapping and pull every regular gate back to logical qubits
    let mut holder = sc.initial_mapping.inverse(device.num_qubits());
    let mut pulled: Vec<(usize, Operands)> = Vec::with_capacity(regular);
    let mut k = 0;
    while k < order.len() {
        let t = sc.gates[order[k]].time;
        let mut end = k;
        while end < order.len() && sc.gates[order[end]].time == t {
            end += 1;
        }
        for &i in &order[k..end] {
            if roles[i] != Role::Regular {
                continue;
            }
            let g = &sc.gates[i];
            let logical = |p: usize| holder[p];
            let ops = match g.space {
                Space::Qubit(p) => logical(p).map(Operands::One),
                Space::Edge(a, b) => logical(a).zip(logical(b)).map(|(x, y)| Operands::Two(x, y)),
            };
            match ops {
                Some(ops) => pulled.push((i, ops)),
                None => {
                    return fail(
                        report,
                        Violation {
                            kind: ViolationKind::ExtraGate,
                            scheduled_gate: Some(i),
                            input_gate: None,
                            reason: format!("cycle {t}: {} acts on a physical qubit holding no logical qubit", g.space),
                        },
                    )
                }
            }
        }
        for &i in &order[k..end] {
            if roles[i] == Role::SwapEnd {
                if let Space::Edge(a, b) = sc.gates[i].space {
                    holder.swap(a, b);
                }
            }
        }
        k = end;
    }

    // every input gate executed exactly once
    let mut wanted: HashMap<Operands, usize> = HashMap::new();
    for g in input.gates() {
        *wanted.entry(g.operands).or_default() += 1;
    }
    let mut used: HashMap<Operands, usize> = HashMap::new();
    for &(i, ops) in &pulled {
        let n = used.entry(ops).or_default();
        *n += 1;
        if *n > wanted.get(&ops).copied().unwrap_or(0) {
            return fail(
                report,
                Violation {
                    kind: ViolationKind::ExtraGate,
                    scheduled_gate: Some(i),
                    input_gate: None,
                    reason: format!("cycle {}: no remaining input gate acts on {}", sc.gates[i].time, describe(ops)),
                },
            );
        }
    }
    let mut seen: HashMap<Operands, usize> = HashMap::new();
    let missing = input.gates().iter().position(|g| {
        let k = seen.entry(g.operands).or_default();
        *k += 1;
        *k > used.get(&g.operands).copied().unwrap_or(0)
    });
    if let Some(i) = missing {
        return fail(
            report,
            Violation {
                kind: ViolationKind::MissingGate,
                scheduled_gate: None,
                input_gate: Some(i),
                reason: format!("input gate {i} ({}) is never executed", input.gates()[i]),
            },
        );
    }

    // dependencies: each gate must head the queue of all its qubits
    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); sc.initial_mapping.len()];
    for (i, g) in input.gates().iter().enumerate() {
        for q in g.operands.iter() {
            queues[q].push_back(i);
        }
    }
    for &(i, ops) in &pulled {
        let heads: Vec<Option<usize>> = ops.iter().map(|q| queues[q].front().copied()).collect();
        let head = heads[0];
        let matched = head.filter(|&h| {
            heads.iter().all(|&x| x == Some(h)) && input.gates()[h].operands == ops
        });
        match matched {
            Some(_) => {
                for q in ops.iter() {
                    queues[q].pop_front();
                }
            }
            None => {
                let blocking = ops
                    .iter()
                    .zip(&heads)
                    .find_map(|(q, h)| h.filter(|&h| input.gates()[h].operands != ops).map(|h| (q, h)));
                let reason = match blocking {
                    Some((q, h)) => format!(
                        "cycle {}: {} runs before input gate {h} ({}) on q{q}",
                        sc.gates[i].time,
                        describe(ops),
                        input.gates()[h]
                    ),
                    None => format!("cycle {}: {} is out of order", sc.gates[i].time, describe(ops)),
                };
                return fail(
                    report,
                    Violation {
                        kind: ViolationKind::DependencyViolation,
                        scheduled_gate: Some(i),
                        input_gate: blocking.map(|(_, h)| h),
                        reason,
                    },
                );
            }
        }
    }

    report.valid = true;
    Ok(report)
}

fn describe(ops: Operands) -> String {
    match ops {
        Operands::One(q) => format!("a gate on q{q}"),
        Operands::Two(a, b) => format!("a gate on (q{a}, q{b})"),
    }
}

impl VerifyReport {
    /// Fill `depth_ratio` from the SWAP-accounted depth and the known optimum.
    pub fn attach_ratio(&mut self, optimum: usize) -> Result<Ratio<u64>, ScheduleError> {
        let r = depth_ratio(self.accounted_depth, optimum)?;
        self.depth_ratio = Some(r);
        Ok(r)
    }
}

/// Result of [`asap_schedule`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Asap {
    Feasible(ScheduledCircuit),
    /// Gate `gate` is a two-qubit gate whose image is not a device edge.
    Infeasible { gate: usize },
}

/// Schedule every gate at its earliest dependency cycle under a fixed
/// mapping, without inserting any SWAP.
pub fn asap_schedule(
    c: &Circuit,
    mapping: &Mapping,
    device: &DeviceGraph,
) -> Result<Asap, ScheduleError> {
    if mapping.len() < c.num_qubits() {
        return Err(ScheduleError::MappingTooSmall {
            mapped: mapping.len(),
            needed: c.num_qubits(),
        });
    }
    mapping.check_device(device)?;
    let profile = c.dependency_profile();
    let mut gates = Vec::with_capacity(c.len());
    for (i, (g, &t)) in c.gates().iter().zip(&profile.per_gate_depth).enumerate() {
        let space = match g.operands {
            Operands::One(q) => Space::Qubit(mapping.physical(q)),
            Operands::Two(a, b) => {
                let (pa, pb) = (mapping.physical(a), mapping.physical(b));
                if !device.has_edge(pa, pb) {
                    return Ok(Asap::Infeasible { gate: i });
                }
                Space::Edge(pa, pb)
            }
        };
        gates.push(ScheduledGate::new(t, space, g.label.clone()));
    }
    Ok(Asap::Feasible(ScheduledCircuit {
        initial_mapping: mapping.clone(),
        gates,
    }))
}

/// Expand each flagged SWAP into `CX(a,b) CX(b,a) CX(a,b)` on three
/// consecutive cycles. Gates that depend on a SWAP through a shared physical
/// qubit are pushed later as needed; other gates keep their cycle. On a
/// directed device the middle CX runs against the edge, so the result is a
/// depth model there rather than an executable schedule.
pub fn swap_depth_accounting(sc: &ScheduledCircuit) -> ScheduledCircuit {
    if sc.gates.iter().all(|g| !g.is_swap) {
        return sc.clone();
    }
    let num_physical = sc
        .gates
        .iter()
        .flat_map(|g| g.space.qubits())
        .chain(sc.initial_mapping.as_slice().iter().copied())
        .max()
        .map_or(0, |m| m + 1);
    let mut ready = vec![0usize; num_physical];
    let mut gates = Vec::with_capacity(sc.gates.len() + 2 * sc.swap_count());
    for i in sc.time_order() {
        let g = &sc.gates[i];
        let start = g
            .space
            .qubits()
            .map(|p| ready[p] + 1)
            .max()
            .unwrap()
            .max(g.time);
        match (g.is_swap, g.space) {
            (true, Space::Edge(a, b)) => {
                for (k, space) in [Space::Edge(a, b), Space::Edge(b, a), Space::Edge(a, b)]
                    .into_iter()
                    .enumerate()
                {
                    gates.push(ScheduledGate::new(start + k, space, "cx"));
                }
                ready[a] = start + 2;
                ready[b] = start + 2;
            }
            _ => {
                for p in g.space.qubits() {
                    ready[p] = start;
                }
                gates.push(ScheduledGate {
                    time: start,
                    ..g.clone()
                });
            }
        }
    }
    ScheduledCircuit {
        initial_mapping: sc.initial_mapping.clone(),
        gates,
    }
}

/// `depth / optimum` as an exact ratio. A ratio below one can only come from
/// a wrong optimum and is an error.
pub fn depth_ratio(depth: usize, optimum: usize) -> Result<Ratio<u64>, ScheduleError> {
    if depth < optimum || optimum == 0 {
        return Err(ScheduleError::BelowOptimum { depth, optimum });
    }
    Ok(Ratio::new(depth as u64, optimum as u64))
}
