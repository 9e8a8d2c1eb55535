//! Simulation of a joint-transform-correlator (JTC) CNN accelerator.
//!
//! * [`optics`]: Fourier-optics model of the correlator.
//! * [`tiling`]: 2D convolution as 1D correlations (row tiling).
//! * [`fidelity`]: quantization, ADC readout, noise and temporal accumulation.
//! * [`archmodel`]: power, area, cycle and throughput models.
//! * [`workloads`]: CNN layer tables.
//!
//! Numeric code is generic over [`Scalar`] / [`Real`]; the aliases below fix
//! the common `f64` case.

// `!(x > 0.0)` is how the validators reject NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod archmodel;
pub mod correlate;
pub mod fidelity;
pub mod optics;
pub mod scalar;
pub mod tiling;
pub mod workloads;

pub use archmodel::{ArchError, HardwareConfig, ParallelizationScheme, PerfReport, PowerBreakdown};
pub use correlate::{cross_correlate_full, Correlator1D, DirectCorrelator};
pub use fidelity::{AccumulationConfig, Detection, FidelityError, QuantConfig};
pub use optics::{JtcConfig, JtcCorrelator, OpticsError, Readout};
pub use scalar::{Real, Scalar};
pub use tiling::{ConvMode, PaddingMode, TilingError, TilingPlan, TilingVariant};

pub type Signal = optics::Signal1D<f64>;
pub type Image = tiling::Image2D<f64>;
pub type Kernel = tiling::Kernel2D<f64>;
pub type JtcOutput = optics::JtcOutput<f64>;
pub use workloads::{builtin_network, parse_network, LayerSpec, NetworkSpec, WorkloadError};
