//! Benchmarks with known optimal depth for qubit layout synthesis, and the
//! tooling to check schedules against them.
//!
//! [`generate`] builds a circuit together with a [`SolutionSidecar`] holding
//! a SWAP-free schedule of the target depth. [`verify`] checks any schedule
//! against its input circuit and device, [`route`] is a simple baseline
//! router, and [`reduction`] turns Hamiltonian-cycle instances into
//! depth-decision instances.

pub mod circuit;
pub mod device;
pub mod generator;
pub mod qasm;
pub mod reduction;
pub mod router;
pub mod schedule;

pub use num_rational::Ratio;

pub use circuit::{extract_density, Circuit, CircuitError, Gate, GateDensity, MeasuredDensity, Operands};
pub use device::{load_device, matching_bound, DeviceError, DeviceGraph, MatchingBound};
pub use generator::{generate, generate_with_bound, GenError, GenSpec, PlacedGate, SolutionSidecar};
pub use qasm::{emit_qasm, parse_qasm, QasmError};
pub use reduction::{build_reduction, depth_decision_oracle, hamiltonian_cycle_oracle, ReductionInstance};
pub use router::{place, route, Placement, RouteError, RouterConfig};
pub use schedule::{
    asap_schedule, swap_depth_accounting, verify, Asap, Mapping, ScheduleError, ScheduledCircuit, ScheduledGate, Space,
    VerifyOptions, VerifyReport, Violation, ViolationKind,
};
