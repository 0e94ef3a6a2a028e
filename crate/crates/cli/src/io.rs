use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use queko::{load_device, DeviceGraph};

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input.
    Usage(String),
    /// The input was understood but rejected: not admissible, or a schedule
    /// that fails verification.
    Rejected(String),
    /// Generation gave up after its retry budget, or a self-check failed.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Rejected(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Rejected(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

pub fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: &dyn fmt::Display| CliError::Usage(format!("{}: {e}", path.display()));
    fs::create_dir_all(&dir).map_err(|e| fail(&e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// A built-in device name, a generated family (`grid:RxC`, `complete:N`,
/// `cycle:N`, `path:N`, `star:N`), or a path to an edge-list file.
pub fn resolve_device(spec: &str) -> Result<DeviceGraph, CliError> {
    if let Some(g) = DeviceGraph::builtin(spec) {
        return Ok(g);
    }
    if let Some((family, arg)) = spec.split_once(':') {
        let n = || match arg.parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(usage(format!("invalid size `{arg}` in `{spec}`"))),
        };
        let g = match family {
            "grid" => {
                let (r, c) = arg
                    .split_once(['x', 'X'])
                    .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
                    .filter(|&(r, c): &(usize, usize)| r > 0 && c > 0)
                    .ok_or_else(|| usage(format!("expected grid:RxC, found `{spec}`")))?;
                DeviceGraph::grid(r, c)
            }
            "complete" => DeviceGraph::complete(n()?),
            "cycle" => DeviceGraph::cycle(n()?),
            "path" => DeviceGraph::path(n()?),
            "star" => DeviceGraph::star(n()?),
            _ => return resolve_file(spec),
        };
        return Ok(g);
    }
    resolve_file(spec)
}

fn resolve_file(spec: &str) -> Result<DeviceGraph, CliError> {
    let path = Path::new(spec);
    if !path.exists() {
        let names: Vec<&str> = queko::device::BUILTIN_DEVICES.iter().map(|(n, _)| *n).collect();
        return Err(usage(format!(
            "unknown device `{spec}`: not a file, a family like grid:6x9, or one of {}",
            names.join(", ")
        )));
    }
    load_device(&read(path)?).map_err(|e| usage(format!("{spec}: {e}")))
}
