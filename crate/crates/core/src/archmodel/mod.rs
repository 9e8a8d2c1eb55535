//! Architecture models: parallelization, cycles, power, area and
//! network-level throughput.

pub mod area;
pub mod config;
pub mod cycles;
pub mod ladder;
pub mod parallel;
pub mod perf;
pub mod power;
pub mod sweep;

use thiserror::Error;

use crate::tiling::TilingError;

pub use area::{area_breakdown, AreaBreakdown};
pub use config::{ComponentDims, ComponentPowers, Dim, ElectronicArea, HardwareConfig};
pub use cycles::{layer_cycles, LayerCycles};
pub use ladder::{optimization_ladder, run_ladder, LadderReport};
pub use parallel::{
    objective_exact, optimize_parallelization, parallelization_objective, OptimizerReport, ParallelizationScheme,
};
pub use perf::{geometric_mean, network_perf, LayerPerf, PerfReport};
pub use power::{power_breakdown, Activity, PowerBreakdown};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchError {
    #[error("IB = {ib} does not divide n_pfcu = {n_pfcu}")]
    NotADivisor { ib: usize, n_pfcu: usize },
    #[error("count {0} must be a positive power of two")]
    InvalidCount(usize),
    #[error("kernel needs {taps} weight taps per cycle, only {n_w} weight waveguides")]
    TooManyTaps { taps: usize, n_w: usize },
    #[error("invalid layer: {0}")]
    Layer(String),
    #[error("layer {index} ({name}) infeasible: {reason}")]
    LayerInfeasible { index: usize, name: String, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Tiling(#[from] TilingError),
}
