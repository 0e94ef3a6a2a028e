//! `queko gen`: parameter sweeps over devices, depths, densities and seeds.

use std::path::Path;

use clap::ValueEnum;
use queko::Ratio;
use queko::circuit::format_ratio;
use queko::device::DEFAULT_MATCHING_BUDGET;
use queko::generator::{check_admissible, target_counts, Rejection};
use queko::{emit_qasm, generate_with_bound, matching_bound, DeviceGraph, GenError, GenSpec, GateDensity, MatchingBound};
use rayon::prelude::*;

use crate::io::{usage, write_atomic, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Near-term depths 5..=45 step 5, TFL and QSE densities.
    Ntf,
    /// Scaling depths 100..=900 step 100, QSE density.
    Ss,
    /// Density sweep on Tokyo at depth 45: d1, d2 in steps of 0.1 with
    /// d1 + d2 <= 1.
    Igd,
}

#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub devices: Vec<DeviceGraph>,
    pub depths: Vec<usize>,
    pub densities: Vec<GateDensity>,
    pub seeds: Vec<u64>,
    pub retry_limit: usize,
}

/// `15`, `5,15,25`, or an inclusive range `start:end:step` (`5:45:5`).
pub fn parse_depths(values: &[String]) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in values.iter().flat_map(|v| v.split(',')) {
        let item = item.trim();
        let bad = || usage(format!("invalid depth `{item}` (expected N or start:end:step)"));
        let parts: Vec<usize> = item
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [d] => out.push(*d),
            [a, b] => out.extend(*a..=*b),
            [a, b, s] if *s > 0 => out.extend((*a..=*b).step_by(*s)),
            _ => return Err(bad()),
        }
    }
    if let Some(pos) = out.iter().position(|&d| d == 0) {
        return Err(usage(format!("depth {} must be positive", out[pos])));
    }
    Ok(out)
}

pub fn preset_depths(p: Preset) -> Vec<usize> {
    match p {
        Preset::Ntf => (5..=45).step_by(5).collect(),
        Preset::Ss => (100..=900).step_by(100).collect(),
        Preset::Igd => vec![45],
    }
}

pub fn preset_densities(p: Preset) -> Vec<GateDensity> {
    match p {
        Preset::Ntf => vec![GateDensity::tfl(), GateDensity::qse()],
        Preset::Ss => vec![GateDensity::qse()],
        Preset::Igd => (1..=9u64)
            .flat_map(|a| (1..=9u64).filter(move |b| a + b <= 10).map(move |b| (a, b)))
            .map(|(a, b)| GateDensity::new(Ratio::new(a, 10), Ratio::new(b, 10)).expect("sums to at most 1"))
            .collect(),
    }
}

enum Outcome {
    Generated { m1: usize, m2: usize, attempt: usize, file: String },
    Rejected(Rejection),
    Exhausted { m1: usize, m2: usize, error: GenError },
}

struct Point<'a> {
    spec: GenSpec,
    bound: &'a MatchingBound,
}

/// Generate every point, write `<stem>.qasm` and `<stem>.sol` per
/// benchmark, and print a CSV summary in point order.
pub fn run(batch: &BatchSpec, out_dir: &Path, jobs: usize, check_only: bool) -> Result<(), CliError> {
    let bounds: Vec<MatchingBound> = batch
        .devices
        .iter()
        .map(|d| {
            let u = matching_bound(d, DEFAULT_MATCHING_BUDGET);
            if !u.exact {
                eprintln!("warning: matching bound of {} is only a lower bound ({})", d.name(), u.value);
            }
            u
        })
        .collect();
    let mut points = Vec::new();
    for (device, bound) in batch.devices.iter().zip(&bounds) {
        for &depth in &batch.depths {
            for &density in &batch.densities {
                for &seed in &batch.seeds {
                    let mut spec = GenSpec::new(device.clone(), depth, density, seed);
                    spec.retry_limit = batch.retry_limit;
                    points.push(Point { spec, bound });
                }
            }
        }
    }

    // admissibility first, so a bad sweep fails before any file is written
    let admissible: Vec<Result<(), Rejection>> = points
        .iter()
        .map(|p| check_admissible(&p.spec, *p.bound).map(|_| ()))
        .collect();
    for (p, a) in points.iter().zip(&admissible) {
        if let Err(r) = a {
            eprintln!("rejected {}: {r}", p.spec.file_stem());
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let outcomes: Vec<Result<Outcome, CliError>> = pool.install(|| {
        points
            .par_iter()
            .zip(admissible.par_iter())
            .map(|(p, a)| {
                if let Err(r) = a {
                    return Ok(Outcome::Rejected(*r));
                }
                let (m1, m2) = target_counts(&p.spec);
                if check_only {
                    return Ok(Outcome::Generated { m1, m2, attempt: 0, file: String::new() });
                }
                match generate_with_bound(&p.spec, *p.bound) {
                    Ok((circuit, sidecar)) => {
                        let stem = p.spec.file_stem();
                        let file = format!("{stem}.qasm");
                        write_atomic(&out_dir.join(&file), &emit_qasm(&circuit))?;
                        write_atomic(&out_dir.join(format!("{stem}.sol")), &sidecar.to_text())?;
                        Ok(Outcome::Generated { m1, m2, attempt: sidecar.attempt, file })
                    }
                    Err(error) => Ok(Outcome::Exhausted { m1, m2, error }),
                }
            })
            .collect()
    });

    let mut csv = csv::Writer::from_writer(std::io::stdout());
    let row_err = |e: csv::Error| CliError::Internal(e.to_string());
    csv.write_record(["device", "qubits", "depth", "d1", "d2", "seed", "status", "m1", "m2", "gates", "attempt", "file"])
        .map_err(row_err)?;
    let (mut ok, mut rejected, mut exhausted) = (0, 0, 0);
    for (p, outcome) in points.iter().zip(outcomes) {
        let s = &p.spec;
        let (status, m1, m2, attempt, file) = match outcome? {
            Outcome::Generated { m1, m2, attempt, file } => {
                ok += 1;
                let attempt = if check_only { String::new() } else { attempt.to_string() };
                ("ok".to_string(), m1, m2, attempt, file)
            }
            Outcome::Rejected(r) => {
                rejected += 1;
                (format!("rejected: {}", r.predicate), r.m1, r.m2, String::new(), String::new())
            }
            Outcome::Exhausted { m1, m2, error } => {
                exhausted += 1;
                eprintln!("failed {}: {error}", s.file_stem());
                ("exhausted".to_string(), m1, m2, String::new(), String::new())
            }
        };
        csv.write_record([
            s.device.name().to_string(),
            s.device.num_qubits().to_string(),
            s.depth_target.to_string(),
            format_ratio(s.density.d1()),
            format_ratio(s.density.d2()),
            s.seed.to_string(),
            status,
            m1.to_string(),
            m2.to_string(),
            (m1 + m2).to_string(),
            attempt,
            file,
        ])
        .map_err(row_err)?;
    }
    csv.flush().map_err(|e| CliError::Internal(e.to_string()))?;
    if exhausted > 0 {
        Err(CliError::Internal(format!("{exhausted} point(s) ran out of retries")))
    } else if ok == 0 && rejected > 0 {
        Err(CliError::Rejected("every point was rejected as not admissible".into()))
    } else {
        Ok(())
    }
}
