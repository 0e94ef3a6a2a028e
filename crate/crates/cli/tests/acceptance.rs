//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use queko::device::DEFAULT_MATCHING_BUDGET;
use queko::reduction::{certifies, mapping_from_cycle};
use queko::{
    asap_schedule, build_reduction, depth_decision_oracle, extract_density, generate, generate_with_bound,
    hamiltonian_cycle_oracle, matching_bound, parse_qasm, place, route, verify, Asap, Circuit, DeviceGraph,
    GateDensity, GenError, GenSpec, Ratio, RouterConfig, ScheduledCircuit, SolutionSidecar, Space, VerifyOptions,
    ViolationKind,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Densities as integer percentages, so the expected counts are computed
/// without going through the library's rational type.
const DENSITIES: [(&str, u64, u64); 2] = [("tfl", 27, 36), ("qse", 51, 40)];
const DEPTHS: [usize; 5] = [5, 15, 25, 35, 45];
const SEEDS: u64 = 10;

fn expected_counts(n: usize, t: usize, d1_pct: u64, d2_pct: u64) -> (usize, usize) {
    let nt = (n * t) as u64;
    ((d1_pct * nt).div_ceil(100) as usize, (d2_pct * nt).div_ceil(200) as usize)
}

struct Instance {
    device: DeviceGraph,
    depth: usize,
    pct: (u64, u64),
    circuit: Circuit,
    sidecar: SolutionSidecar,
}

fn sweep_devices() -> Vec<DeviceGraph> {
    vec![DeviceGraph::builtin("ourense").unwrap(), DeviceGraph::grid(4, 4), DeviceGraph::grid(6, 9)]
}

fn build_sweep() -> Result<Vec<Instance>, String> {
    let mut out = Vec::new();
    for device in sweep_devices() {
        let u = matching_bound(&device, DEFAULT_MATCHING_BUDGET);
        for &depth in &DEPTHS {
            for &(name, a, b) in &DENSITIES {
                let density = GateDensity::parse(name).unwrap();
                for seed in 0..SEEDS {
                    let spec = GenSpec::new(device.clone(), depth, density, seed);
                    let (circuit, sidecar) = generate_with_bound(&spec, u)
                        .map_err(|e| format!("{} T={depth} {name} seed {seed}: {e}", device.name()))?;
                    out.push(Instance { device: device.clone(), depth, pct: (a, b), circuit, sidecar });
                }
            }
        }
    }
    Ok(out)
}

fn round_trip(sweep: &[Instance], elapsed: Duration) -> Outcome {
    ensure!(sweep.len() == 300, "expected 300 instances, built {}", sweep.len());
    for inst in sweep {
        let n = inst.device.num_qubits();
        let tag = format!("{} T={} seed {}", inst.device.name(), inst.depth, inst.sidecar.spec.seed);
        let want = expected_counts(n, inst.depth, inst.pct.0, inst.pct.1);
        ensure!(inst.circuit.counts() == want, "{tag}: counts {:?}, expected {want:?}", inst.circuit.counts());
        let mapping = inst.sidecar.initial_mapping();
        let sc = match asap_schedule(&inst.circuit, &mapping, &inst.device).map_err(|e| e.to_string())? {
            Asap::Feasible(sc) => sc,
            Asap::Infeasible { gate } => return Err(format!("{tag}: gate {gate} is off-edge under the sidecar mapping")),
        };
        let r = verify(&inst.device, &sc, &inst.circuit, VerifyOptions::default()).map_err(|e| e.to_string())?;
        ensure!(r.valid, "{tag}: {:?}", r.violation);
        ensure!(r.inserted_swap_count == 0, "{tag}: {} swaps", r.inserted_swap_count);
        ensure!(r.depth == inst.depth, "{tag}: depth {}", r.depth);
    }
    ensure!(elapsed < Duration::from_secs(60), "sweep took {elapsed:?}");
    Ok(format!("300/300 valid, zero swaps, depth exactly T; generated in {:.1}s", elapsed.as_secs_f64()))
}

fn scale_check() -> Outcome {
    let device = DeviceGraph::grid(6, 9);
    let (m1, m2) = expected_counts(54, 45, 51, 40);
    ensure!((m1, m2) == (1240, 486), "oracle arithmetic gave {m1} + {m2}");
    let start = Instant::now();
    let (c, _) = generate(&GenSpec::new(device, 45, GateDensity::qse(), 0)).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure!(c.counts() == (m1, m2), "generated counts {:?}", c.counts());
    ensure!((1136..=34506).contains(&(m1 + m2)), "{} gates is outside 1136..=34506", m1 + m2);
    ensure!(took < Duration::from_secs(5), "generation took {took:?}");
    Ok(format!("M1+M2 = {m1}+{m2} = {} in {:.2}s", m1 + m2, took.as_secs_f64()))
}

const TOFFOLI: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[3];
h q[2]; cx q[1],q[2]; tdg q[2]; cx q[0],q[2]; t q[2]; cx q[1],q[2]; tdg q[2]; cx q[0],q[2];
t q[1]; t q[2]; h q[2]; cx q[0],q[1]; t q[0]; tdg q[1]; cx q[0],q[1];
";

fn density_recovery(sweep: &[Instance]) -> Outcome {
    let toffoli = parse_qasm(TOFFOLI).map_err(|e| e.to_string())?;
    let d = extract_density(&toffoli).map_err(|e| e.to_string())?;
    ensure!(d.d1 == Ratio::new(9, 33) && d.d2 == Ratio::new(12, 33), "toffoli density {} {}", d.d1, d.d2);
    ensure!(
        format!("{:.2} {:.2}", d.d1_f64(), d.d2_f64()) == "0.27 0.36",
        "toffoli rounds to {:.2} {:.2}",
        d.d1_f64(),
        d.d2_f64()
    );
    let mut worst = 0.0f64;
    for inst in sweep {
        let m = extract_density(&inst.circuit).map_err(|e| e.to_string())?;
        let nt = (inst.device.num_qubits() * inst.depth) as u64;
        let slack = Ratio::new(2, nt);
        for (got, pct) in [(m.d1, inst.pct.0), (m.d2, inst.pct.1)] {
            let target = Ratio::new(pct, 100);
            let delta = if got >= target { got - target } else { target - got };
            ensure!(delta <= slack, "{}: |{got} - {target}| exceeds 2/{nt}", inst.sidecar.spec.file_stem());
            worst = worst.max(*delta.numer() as f64 / *delta.denom() as f64 * nt as f64);
        }
    }
    Ok(format!("toffoli = (9/33, 12/33); 300 benchmarks within 2/(N*T) (worst {worst:.2}/(N*T))"))
}

#[derive(Clone, Copy, Debug)]
enum Mutation {
    Delete,
    OrderSwap,
    OffEdge,
    Premature,
}

impl Mutation {
    fn expected(self) -> ViolationKind {
        match self {
            Mutation::Delete => ViolationKind::MissingGate,
            Mutation::OrderSwap | Mutation::Premature => ViolationKind::DependencyViolation,
            Mutation::OffEdge => ViolationKind::InfeasibleTwoQubitGate,
        }
    }
}

fn occupied(sc: &ScheduledCircuit, skip: &[usize]) -> HashSet<(usize, usize)> {
    sc.gates
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .flat_map(|(_, g)| g.space.qubits().map(move |p| (g.time, p)))
        .collect()
}

fn free_at(busy: &HashSet<(usize, usize)>, space: Space, t: usize) -> bool {
    space.qubits().all(|p| !busy.contains(&(t, p)))
}

/// Apply one random mutation of the given class, or `None` if the schedule
/// admits none.
fn mutate(sc: &ScheduledCircuit, device: &DeviceGraph, kind: Mutation, rng: &mut StdRng) -> Option<ScheduledCircuit> {
    let mut m = sc.clone();
    let n = sc.gates.len();
    match kind {
        Mutation::Delete => {
            m.gates.remove(rng.gen_range(0..n));
        }
        Mutation::OffEdge => {
            let twos: Vec<usize> = (0..n).filter(|&i| sc.gates[i].space.arity() == 2).collect();
            let phys = device.num_qubits();
            let non_edges: Vec<(usize, usize)> = (0..phys)
                .flat_map(|a| (0..phys).map(move |b| (a, b)))
                .filter(|&(a, b)| a != b && !device.coupled(a, b))
                .collect();
            if twos.is_empty() || non_edges.is_empty() {
                return None;
            }
            let (a, b) = non_edges[rng.gen_range(0..non_edges.len())];
            m.gates[twos[rng.gen_range(0..twos.len())]].space = Space::Edge(a, b);
        }
        Mutation::OrderSwap => {
            // pairs of different gates that are consecutive on some qubit and
            // can trade cycles without colliding with anything else
            let mut by_qubit: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| sc.gates[i].time);
            for &i in &order {
                for p in sc.gates[i].space.qubits() {
                    by_qubit.entry(p).or_default().push(i);
                }
            }
            let mut cands = Vec::new();
            for seq in by_qubit.values() {
                for w in seq.windows(2) {
                    let (x, y) = (w[0], w[1]);
                    let (gx, gy) = (&sc.gates[x], &sc.gates[y]);
                    if gx.space == gy.space {
                        continue;
                    }
                    let busy = occupied(sc, &[x, y]);
                    if free_at(&busy, gx.space, gy.time) && free_at(&busy, gy.space, gx.time) {
                        cands.push((x, y));
                    }
                }
            }
            if cands.is_empty() {
                return None;
            }
            let (x, y) = cands[rng.gen_range(0..cands.len())];
            let (tx, ty) = (m.gates[x].time, m.gates[y].time);
            m.gates[x].time = ty;
            m.gates[y].time = tx;
        }
        Mutation::Premature => {
            // move a gate to a free earlier cycle that lies before some
            // different gate on one of its qubits
            let mut cands = Vec::new();
            for (i, g) in sc.gates.iter().enumerate() {
                let busy = occupied(sc, &[i]);
                for t in 1..g.time {
                    if !free_at(&busy, g.space, t) {
                        continue;
                    }
                    let overtakes = sc.gates.iter().any(|h| {
                        h.time > t && h.time < g.time && h.space != g.space && h.space.overlaps(g.space)
                    });
                    if overtakes {
                        cands.push((i, t));
                    }
                }
            }
            if cands.is_empty() {
                return None;
            }
            let (i, t) = cands[rng.gen_range(0..cands.len())];
            m.gates[i].time = t;
        }
    }
    Some(m)
}

fn mutation_suite(sweep: &[Instance]) -> Outcome {
    for inst in sweep {
        let r = verify(&inst.device, &inst.sidecar.to_schedule(), &inst.circuit, VerifyOptions::default())
            .map_err(|e| e.to_string())?;
        ensure!(r.valid, "unmutated {} rejected: {:?}", inst.sidecar.spec.file_stem(), r.violation);
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut summary = Vec::new();
    for kind in [Mutation::Delete, Mutation::OrderSwap, Mutation::OffEdge, Mutation::Premature] {
        let mut made = 0;
        let mut tries = 0;
        while made < 100 {
            tries += 1;
            ensure!(tries < 10_000, "{kind:?}: could only build {made} mutants");
            let inst = &sweep[rng.gen_range(0..sweep.len())];
            let Some(m) = mutate(&inst.sidecar.to_schedule(), &inst.device, kind, &mut rng) else { continue };
            made += 1;
            let r = verify(&inst.device, &m, &inst.circuit, VerifyOptions::default()).map_err(|e| e.to_string())?;
            let got = r.violation.as_ref().map(|v| v.kind);
            ensure!(
                !r.valid && got == Some(kind.expected()),
                "{kind:?} mutant of {} classified as {got:?}",
                inst.sidecar.spec.file_stem()
            );
        }
        summary.push(format!("{kind:?} 100/100"));
    }
    Ok(format!("unmutated 300/300 valid; {}", summary.join(", ")))
}

/// Minimum maximal matching by enumerating every edge subset.
fn brute_min_maximal_matching(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut best = usize::MAX;
    for mask in 0u32..(1 << edges.len()) {
        let mut covered = 0u64;
        let mut is_matching = true;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let bits = 1u64 << a | 1u64 << b;
                if covered & bits != 0 {
                    is_matching = false;
                    break;
                }
                covered |= bits;
            }
        }
        if !is_matching {
            continue;
        }
        let maximal = edges.iter().all(|&(a, b)| covered >> a & 1 == 1 || covered >> b & 1 == 1);
        if maximal {
            best = best.min(mask.count_ones() as usize);
        }
    }
    debug_assert!(n > 0 || edges.is_empty());
    best
}

fn admissibility() -> Outcome {
    let pct = |a, b| GateDensity::new(Ratio::new(a, 100), Ratio::new(b, 100)).unwrap();
    let ourense = DeviceGraph::builtin("ourense").unwrap();
    let star = DeviceGraph::star(5);
    let cases = [
        // 10 > ceil(0.01*50) + 0
        (ourense.clone(), 10, pct(1, 0), 1usize),
        // 3 + 2*2 > 5*1
        (ourense.clone(), 1, pct(50, 50), 2),
        // star u=1: ceil(0.6*50/2) = 15 > 10
        (star, 10, pct(10, 60), 3),
    ];
    let mut fired = Vec::new();
    for (device, depth, density, which) in cases {
        let spec = GenSpec::new(device, depth, density, 0);
        let text = match generate(&spec) {
            Err(GenError::NotAdmissible(r)) => r.predicate.to_string(),
            other => return Err(format!("case {which}: expected a rejection, got {:?}", other.map(|_| ()))),
        };
        fired.push(text);
    }
    ensure!(
        fired.iter().collect::<HashSet<_>>().len() == 3,
        "predicates not distinct: {fired:?}"
    );

    // every labelled graph on up to 6 vertices with at most 12 edges, plus
    // random sparse graphs on 7..=12 vertices and a few named devices
    let mut graphs: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    for n in 1..=6usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            if mask.count_ones() <= 12 {
                graphs.push((n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect()));
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..500 {
        let n = rng.gen_range(7..=12);
        let m = rng.gen_range(1..=12);
        let mut set = HashSet::new();
        while set.len() < m {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        graphs.push((n, set.into_iter().collect()));
    }
    for g in [ourense, DeviceGraph::grid(3, 3), DeviceGraph::grid(2, 4), DeviceGraph::cycle(12), DeviceGraph::complete(5)] {
        graphs.push((g.num_qubits(), g.edges().to_vec()));
    }
    for (n, edges) in &graphs {
        let want = if edges.is_empty() { 0 } else { brute_min_maximal_matching(*n, edges) };
        let g = DeviceGraph::new("g", *n, edges.clone(), false).map_err(|e| e.to_string())?;
        let u = matching_bound(&g, DEFAULT_MATCHING_BUDGET);
        ensure!(u.exact && u.value == want, "n={n} edges={edges:?}: got {u:?}, brute force {want}");
    }
    Ok(format!("3/3 predicates fire; matching bound exact on {} graphs", graphs.len()))
}

fn hc_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(7);
    let mut graphs = Vec::new();
    for n in 3..=7usize {
        graphs.extend([DeviceGraph::complete(n), DeviceGraph::cycle(n), DeviceGraph::path(n), DeviceGraph::star(n)]);
        for i in 0..20 {
            let p: f64 = rng.gen_range(0.2..0.9);
            let mut edges: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(p)).collect();
            if edges.is_empty() {
                edges.push((0, 1));
            }
            graphs.push(DeviceGraph::new(format!("random{n}_{i}"), n, edges, false).map_err(|e| e.to_string())?);
        }
    }
    let (mut yes, mut no) = (0, 0);
    for g in &graphs {
        let inst = build_reduction(g).map_err(|e| e.to_string())?;
        let cycle = hamiltonian_cycle_oracle(g, 12).map_err(|e| e.to_string())?;
        let feasible = depth_decision_oracle(&inst, 9).map_err(|e| e.to_string())?;
        ensure!(cycle.is_some() == feasible, "{}: HC {} but depth-feasible {feasible}", g.name(), cycle.is_some());
        if let Some(c) = &cycle {
            ensure!(certifies(&inst, &mapping_from_cycle(c)), "{}: cycle {c:?} does not certify", g.name());
            yes += 1;
        } else {
            no += 1;
        }
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(120), "took {took:?}");
    Ok(format!("{}/{} agree ({yes} Hamiltonian, {no} not) in {:.1}s", graphs.len(), graphs.len(), took.as_secs_f64()))
}

fn router(sweep: &[Instance]) -> Outcome {
    let cfg = RouterConfig::default();
    let (mut small, mut small_optimal) = (0, 0);
    let mut worst = Ratio::from_integer(1u64);
    for inst in sweep {
        let tag = inst.sidecar.spec.file_stem();
        let m = place(&inst.circuit, &inst.device, &cfg).map_err(|e| e.to_string())?;
        let sc = route(&inst.circuit, &m, &inst.device, &cfg).map_err(|e| format!("{tag}: {e}"))?;
        let mut r = verify(&inst.device, &sc, &inst.circuit, VerifyOptions::default()).map_err(|e| e.to_string())?;
        ensure!(r.valid, "{tag}: {:?}", r.violation);
        ensure!(r.accounted_depth >= inst.depth, "{tag}: depth {} below optimum", r.accounted_depth);
        r.attach_ratio(inst.depth).map_err(|e| e.to_string())?;
        let ratio = r.depth_ratio.unwrap();
        ensure!(ratio == Ratio::new(r.accounted_depth as u64, inst.depth as u64), "{tag}: ratio {ratio}");
        worst = worst.max(ratio);
        if inst.device.name() == "ourense" && inst.depth <= 15 {
            small += 1;
            small_optimal += usize::from(ratio == Ratio::from_integer(1));
        }
    }
    ensure!(small_optimal * 2 >= small, "ourense T<=15: only {small_optimal}/{small} optimal");
    Ok(format!(
        "300/300 valid with ratio >= 1 (max {:.2}); ourense T<=15 optimal on {small_optimal}/{small}",
        *worst.numer() as f64 / *worst.denom() as f64
    ))
}

fn run_gen(dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_queko"))
        .args(["gen", "--device", "ourense", "--device", "grid:4x4", "--device", "tokyo"])
        .args(["--depth", "5,15", "--density", "tfl", "--density", "qse", "--seeds", "3"])
        .args(["--seed", "41", "--jobs", "4", "--out-dir"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "gen failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn read_dir(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let bytes = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
        files.insert(entry.file_name().to_string_lossy().into_owned(), bytes);
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (sa, sb) = (run_gen(a.path())?, run_gen(b.path())?);
    ensure!(sa == sb, "summaries differ");
    let (fa, fb) = (read_dir(a.path())?, read_dir(b.path())?);
    ensure!(fa.len() == 72, "expected 72 files, found {}", fa.len());
    ensure!(fa == fb, "file sets or contents differ");
    Ok(format!("{} files byte-identical across two runs", fa.len()))
}

fn main() {
    let start = Instant::now();
    let built = catch_unwind(build_sweep);
    let generated_in = start.elapsed();
    let sweep = match built {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            println!("FAIL  sweep generation: {e}");
            std::process::exit(1);
        }
        Err(_) => {
            println!("FAIL  sweep generation panicked");
            std::process::exit(1);
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("known-optimal round trip", Box::new(|| round_trip(&sweep, generated_in))),
        ("scale check", Box::new(scale_check)),
        ("density recovery", Box::new(|| density_recovery(&sweep))),
        ("verifier soundness", Box::new(|| mutation_suite(&sweep))),
        ("admissibility gate", Box::new(admissibility)),
        ("reduction equivalence", Box::new(hc_equivalence)),
        ("baseline router", Box::new(|| router(&sweep))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
