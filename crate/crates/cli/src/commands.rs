use std::path::{Path, PathBuf};

use queko::circuit::format_ratio;
use queko::device::{BUILTIN_DEVICES, DEFAULT_MATCHING_BUDGET};
use queko::reduction::{certifies, mapping_from_cycle};
use queko::{
    build_reduction, depth_decision_oracle, emit_qasm, extract_density, hamiltonian_cycle_oracle, matching_bound,
    parse_qasm, place, route, verify, Circuit, DeviceGraph, RouterConfig, ScheduledCircuit, SolutionSidecar,
    VerifyOptions, VerifyReport,
};

use crate::io::{read, resolve_device, usage, write_atomic, CliError};

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    parse_qasm(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_sidecar(path: &Path) -> Result<SolutionSidecar, CliError> {
    read(path)?
        .parse::<SolutionSidecar>()
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// `--device` wins; otherwise the sidecar's device.
fn pick_device(device: Option<&str>, sidecar: Option<&SolutionSidecar>) -> Result<DeviceGraph, CliError> {
    match (device, sidecar) {
        (Some(d), _) => resolve_device(d),
        (None, Some(s)) => Ok(s.spec.device.clone()),
        (None, None) => Err(usage("no device: pass --device or --sidecar")),
    }
}

fn print_report(r: &VerifyReport, optimum: Option<usize>) {
    println!("valid: {}", if r.valid { "yes" } else { "no" });
    if let Some(v) = &r.violation {
        println!("violation: {v}");
    }
    println!("depth: {}", r.depth);
    println!("accounted depth: {}", r.accounted_depth);
    println!("swaps: {}", r.inserted_swap_count);
    println!("added gates: {}", r.added_gates);
    if let (Some(ratio), Some(t)) = (r.depth_ratio, optimum) {
        let f = *ratio.numer() as f64 / *ratio.denom() as f64;
        println!("ratio: {f:.4} ({}/{t})", r.accounted_depth);
    }
}

fn attach_sidecar(
    report: &mut VerifyReport,
    sidecar: Option<&SolutionSidecar>,
    circuit: &Circuit,
) -> Result<Option<usize>, CliError> {
    let Some(s) = sidecar else { return Ok(None) };
    s.matches(circuit).map_err(|e| CliError::Rejected(e.to_string()))?;
    if report.valid {
        report
            .attach_ratio(s.optimal_depth)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(Some(s.optimal_depth))
}

pub fn verify_cmd(
    schedule: &Path,
    benchmark: &Path,
    sidecar: Option<&Path>,
    device: Option<&str>,
    detect_cx_swaps: bool,
) -> Result<(), CliError> {
    let circuit = load_circuit(benchmark)?;
    let sidecar = sidecar.map(load_sidecar).transpose()?;
    let device = pick_device(device, sidecar.as_ref())?;
    let sc = ScheduledCircuit::parse(&read(schedule)?).map_err(|e| usage(format!("{}: {e}", schedule.display())))?;
    let mut report = verify(&device, &sc, &circuit, VerifyOptions { detect_cx_swaps })
        .map_err(|e| CliError::Rejected(e.to_string()))?;
    let optimum = attach_sidecar(&mut report, sidecar.as_ref(), &circuit)?;
    print_report(&report, optimum);
    if report.valid {
        Ok(())
    } else {
        Err(CliError::Rejected("schedule is invalid".into()))
    }
}

pub struct RouteArgs<'a> {
    pub benchmark: &'a Path,
    pub device: Option<&'a str>,
    pub sidecar: Option<&'a Path>,
    pub out: Option<PathBuf>,
    pub out_dir: &'a Path,
    pub config: RouterConfig,
}

pub fn route_cmd(args: RouteArgs<'_>) -> Result<(), CliError> {
    let circuit = load_circuit(args.benchmark)?;
    let sidecar = args.sidecar.map(load_sidecar).transpose()?;
    let device = pick_device(args.device, sidecar.as_ref())?;
    let mapping = place(&circuit, &device, &args.config).map_err(|e| CliError::Rejected(e.to_string()))?;
    let sc = route(&circuit, &mapping, &device, &args.config).map_err(|e| CliError::Rejected(e.to_string()))?;
    let mut report =
        verify(&device, &sc, &circuit, VerifyOptions::default()).map_err(|e| CliError::Internal(e.to_string()))?;
    if !report.valid {
        return Err(CliError::Internal(format!(
            "router produced an invalid schedule: {}",
            report.violation.as_ref().map(ToString::to_string).unwrap_or_default()
        )));
    }
    let optimum = attach_sidecar(&mut report, sidecar.as_ref(), &circuit)?;
    let out = args.out.unwrap_or_else(|| {
        let stem = args.benchmark.file_stem().map_or("routed".into(), |s| s.to_string_lossy().into_owned());
        args.out_dir.join(format!("{stem}.sched"))
    });
    write_atomic(&out, &sc.to_text())?;
    println!("placement: {}", args.config.placement);
    println!("schedule: {}", out.display());
    print_report(&report, optimum);
    Ok(())
}

pub fn density_cmd(path: &Path, exact: bool) -> Result<(), CliError> {
    let c = load_circuit(path)?;
    let d = extract_density(&c).map_err(|e| CliError::Rejected(format!("{}: {e}", path.display())))?;
    println!("d1={:.2} d2={:.2}", d.d1_f64(), d.d2_f64());
    if exact {
        println!(
            "d1={} d2={} qubits={} chain={} m1={} m2={}",
            format_ratio(d.d1),
            format_ratio(d.d2),
            d.num_qubits,
            d.longest_chain,
            d.m1,
            d.m2
        );
    }
    Ok(())
}

pub struct ReduceArgs<'a> {
    pub graph: &'a str,
    pub check: bool,
    pub emit: Option<&'a Path>,
    pub hc_limit: usize,
    pub depth_limit: usize,
}

pub fn reduce_cmd(args: ReduceArgs<'_>) -> Result<(), CliError> {
    let g = resolve_device(args.graph)?;
    let inst = build_reduction(&g).map_err(usage)?;
    let qasm = emit_qasm(&inst.circuit);
    match args.emit {
        Some(path) => write_atomic(path, &qasm)?,
        None if !args.check => print!("{qasm}"),
        None => {}
    }
    if !args.check {
        return Ok(());
    }
    let cycle = hamiltonian_cycle_oracle(&g, args.hc_limit).map_err(usage)?;
    let feasible = depth_decision_oracle(&inst, args.depth_limit).map_err(usage)?;
    // a found cycle must also certify the instance through its own mapping
    let certified = cycle.as_ref().is_none_or(|c| certifies(&inst, &mapping_from_cycle(c)));
    let agree = cycle.is_some() == feasible && certified;
    let yes = |b: bool| if b { "yes" } else { "no" };
    println!(
        "HC: {}; depth-{} feasible: {}; {}",
        yes(cycle.is_some()),
        inst.depth_bound,
        yes(feasible),
        if agree { "AGREE" } else { "DISAGREE" }
    );
    if agree {
        Ok(())
    } else {
        Err(CliError::Internal("oracles disagree".into()))
    }
}

pub fn devices_cmd(name: Option<&str>) -> Result<(), CliError> {
    if let Some(n) = name {
        print!("{}", resolve_device(n)?.to_edge_list());
        return Ok(());
    }
    println!("{:<10} {:>6} {:>6} {:>9} {:>3}", "name", "qubits", "edges", "directed", "u");
    for (n, _) in BUILTIN_DEVICES {
        let g = DeviceGraph::builtin(n).expect("bundled device parses");
        let u = matching_bound(&g, DEFAULT_MATCHING_BUDGET);
        println!(
            "{:<10} {:>6} {:>6} {:>9} {:>3}{}",
            n,
            g.num_qubits(),
            g.edges().len(),
            if g.is_directed() { "yes" } else { "no" },
            u.value,
            if u.exact { "" } else { " (lower bound)" }
        );
    }
    Ok(())
}
