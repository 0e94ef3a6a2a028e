//! Circuits as ordered lists of opaque one- and two-qubit gates.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate {index}: qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange {
        index: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("two-qubit gate on identical operands q{0}")]
    RepeatedOperand(usize),
    #[error("density is undefined for an empty circuit")]
    EmptyCircuit,
    #[error("invalid gate density: {0}")]
    InvalidDensity(String),
}

/// Logical operands of a gate. Operand order is significant for two-qubit
/// gates (control, target).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operands {
    One(usize),
    Two(usize, usize),
}

impl Operands {
    pub fn arity(self) -> usize {
        match self {
            Operands::One(_) => 1,
            Operands::Two(..) => 2,
        }
    }

    pub fn contains(self, q: usize) -> bool {
        match self {
            Operands::One(a) => a == q,
            Operands::Two(a, b) => a == q || b == q,
        }
    }

    pub fn min(self) -> usize {
        match self {
            Operands::One(a) => a,
            Operands::Two(a, b) => a.min(b),
        }
    }

    /// Whether the two gates share a qubit (`g ∩ g' ≠ ∅`).
    pub fn overlaps(self, other: Operands) -> bool {
        other.iter().any(|q| self.contains(q))
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            Operands::One(a) => (a, None),
            Operands::Two(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn map(self, mut f: impl FnMut(usize) -> usize) -> Operands {
        match self {
            Operands::One(a) => Operands::One(f(a)),
            Operands::Two(a, b) => Operands::Two(f(a), f(b)),
        }
    }
}

/// A gate with an opaque label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub label: String,
    pub operands: Operands,
}

impl Gate {
    pub fn one(label: impl Into<String>, q: usize) -> Self {
        Self {
            label: label.into(),
            operands: Operands::One(q),
        }
    }

    pub fn two(label: impl Into<String>, a: usize, b: usize) -> Result<Self, CircuitError> {
        if a == b {
            return Err(CircuitError::RepeatedOperand(a));
        }
        Ok(Self {
            label: label.into(),
            operands: Operands::Two(a, b),
        })
    }

    pub fn arity(&self) -> usize {
        self.operands.arity()
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.operands {
            Operands::One(q) => write!(f, "{} q{q}", self.label),
            Operands::Two(a, b) => write!(f, "{} q{a},q{b}", self.label),
        }
    }
}

/// A circuit over logical qubits `0..num_qubits`. Gate order carries the
/// dependencies; there is no commutation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        for (index, g) in gates.iter().enumerate() {
            if let Operands::Two(a, b) = g.operands {
                if a == b {
                    return Err(CircuitError::RepeatedOperand(a));
                }
            }
            if let Some(qubit) = g.operands.iter().find(|&q| q >= num_qubits) {
                return Err(CircuitError::QubitOutOfRange {
                    index,
                    qubit,
                    num_qubits,
                });
            }
        }
        Ok(Self { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `(M1, M2)`: single- and two-qubit gate counts.
    pub fn counts(&self) -> (usize, usize) {
        let m2 = self.gates.iter().filter(|g| g.arity() == 2).count();
        (self.gates.len() - m2, m2)
    }

    pub fn dependency_profile(&self) -> DependencyProfile {
        dependency_profile(self)
    }
}

/// Earliest feasible cycle of every gate under the operand-sharing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyProfile {
    /// Length `l` of a longest dependency chain (0 for an empty circuit).
    pub longest_chain: usize,
    pub per_gate_depth: Vec<usize>,
}

pub fn dependency_profile(c: &Circuit) -> DependencyProfile {
    let mut frontier = vec![0usize; c.num_qubits];
    let per_gate_depth: Vec<usize> = c
        .gates
        .iter()
        .map(|g| {
            let depth = 1 + g.operands.iter().map(|q| frontier[q]).max().unwrap_or(0);
            for q in g.operands.iter() {
                frontier[q] = depth;
            }
            depth
        })
        .collect();
    DependencyProfile {
        longest_chain: per_gate_depth.iter().copied().max().unwrap_or(0),
        per_gate_depth,
    }
}

/// Gate density vector `(d1, d2)`, held as exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GateDensity {
    d1: Ratio<u64>,
    d2: Ratio<u64>,
}

impl GateDensity {
    /// Preset from the Toffoli decomposition.
    pub const TFL: (u64, u64, u64) = (27, 36, 100);
    /// Preset from the quantum-supremacy random circuits.
    pub const QSE: (u64, u64, u64) = (51, 40, 100);

    pub fn new(d1: Ratio<u64>, d2: Ratio<u64>) -> Result<Self, CircuitError> {
        if d1 + d2 > Ratio::from_integer(1) {
            return Err(CircuitError::InvalidDensity(format!(
                "d1 + d2 = {} exceeds 1",
                d1 + d2
            )));
        }
        Ok(Self { d1, d2 })
    }

    pub fn tfl() -> Self {
        let (a, b, d) = Self::TFL;
        Self::new(Ratio::new(a, d), Ratio::new(b, d)).unwrap()
    }

    pub fn qse() -> Self {
        let (a, b, d) = Self::QSE;
        Self::new(Ratio::new(a, d), Ratio::new(b, d)).unwrap()
    }

    /// Named preset (`tfl`, `qse`) or an explicit `d1,d2` pair of decimals
    /// or fractions.
    pub fn parse(s: &str) -> Result<Self, CircuitError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tfl" => return Ok(Self::tfl()),
            "qse" => return Ok(Self::qse()),
            _ => {}
        }
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| CircuitError::InvalidDensity(format!("expected `d1,d2`, got `{s}`")))?;
        Self::new(parse_ratio(a)?, parse_ratio(b)?)
    }

    pub fn d1(&self) -> Ratio<u64> {
        self.d1
    }

    pub fn d2(&self) -> Ratio<u64> {
        self.d2
    }

    pub fn d1_f64(&self) -> f64 {
        ratio_f64(self.d1)
    }

    pub fn d2_f64(&self) -> f64 {
        ratio_f64(self.d2)
    }
}

impl FromStr for GateDensity {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for GateDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", format_ratio(self.d1), format_ratio(self.d2))
    }
}

pub(crate) fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parse a non-negative decimal (`0.51`), integer, or fraction (`9/33`).
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>, CircuitError> {
    let s = s.trim();
    let bad = || CircuitError::InvalidDensity(format!("invalid number `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 18
    {
        return Err(bad());
    }
    let scale = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_v: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let numer = int
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac_v))
        .ok_or_else(bad)?;
    Ok(Ratio::new(numer, scale))
}

/// Shortest exact decimal when the denominator only has factors 2 and 5,
/// `n/d` otherwise.
pub fn format_ratio(r: Ratio<u64>) -> String {
    let (n, d) = (*r.numer(), *r.denom());
    let mut rest = d;
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return format!("{n}/{d}");
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return n.to_string();
    }
    let scale = 10u128.pow(digits);
    let scaled = n as u128 * (scale / d as u128);
    let int = scaled / scale;
    let frac = scaled % scale;
    format!("{int}.{frac:0width$}", width = digits as usize)
}

/// Gate density measured on a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasuredDensity {
    pub num_qubits: usize,
    pub longest_chain: usize,
    pub m1: usize,
    pub m2: usize,
    /// `M1 / (n·l)`
    pub d1: Ratio<u64>,
    /// `2·M2 / (n·l)`
    pub d2: Ratio<u64>,
}

impl MeasuredDensity {
    pub fn d1_f64(&self) -> f64 {
        ratio_f64(self.d1)
    }

    pub fn d2_f64(&self) -> f64 {
        ratio_f64(self.d2)
    }
}

pub fn extract_density(c: &Circuit) -> Result<MeasuredDensity, CircuitError> {
    if c.is_empty() {
        return Err(CircuitError::EmptyCircuit);
    }
    let (m1, m2) = c.counts();
    let l = dependency_profile(c).longest_chain;
    let slots = (c.num_qubits * l) as u64;
    Ok(MeasuredDensity {
        num_qubits: c.num_qubits,
        longest_chain: l,
        m1,
        m2,
        d1: Ratio::new(m1 as u64, slots),
        d2: Ratio::new(2 * m2 as u64, slots),
    })
}
