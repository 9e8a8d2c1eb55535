//! Step-by-step optimization ladder, starting from a single-PFCU machine
//! with full-size weight waveguides and no temporal accumulation, then
//! adding one optimization per rung.

use serde::{Deserialize, Serialize};

use super::perf::{geometric_mean, network_perf};
use super::{ArchError, HardwareConfig, ParallelizationScheme};
use crate::workloads::NetworkSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct LadderRung {
    pub name: &'static str,
    pub hw: HardwareConfig,
    pub scheme: ParallelizationScheme,
}

/// The single-PFCU starting point: one weight waveguide per input
/// waveguide, ADCs at the photonic clock, square function in MRRs.
pub fn baseline(base: &HardwareConfig) -> HardwareConfig {
    let mut hw = base.clone();
    hw.name = format!("{}-baseline", base.name);
    hw.n_pfcu = 1;
    hw.n_w = base.n_i;
    hw.n_ta = 1;
    hw.nonlinear_material = false;
    hw
}

/// Rungs in order: baseline, small filter, PFCU broadcast, temporal
/// accumulation and optionally nonlinear material. Component powers stay
/// those of `base` throughout.
pub fn optimization_ladder(base: &HardwareConfig, with_nonlinear: bool) -> Vec<LadderRung> {
    let mut rungs = Vec::new();
    let mut hw = baseline(base);
    let push = |rungs: &mut Vec<LadderRung>, name, hw: &HardwareConfig| {
        let scheme = ParallelizationScheme::broadcast(hw.n_pfcu, hw.n_ta);
        rungs.push(LadderRung { name, hw: hw.clone(), scheme });
    };
    push(&mut rungs, "baseline", &hw);
    hw.n_w = base.n_w;
    push(&mut rungs, "small_filter", &hw);
    hw.n_pfcu = base.n_pfcu;
    push(&mut rungs, "pfcu_broadcast", &hw);
    hw.n_ta = base.n_ta;
    push(&mut rungs, "temporal_accumulation", &hw);
    if with_nonlinear {
        hw.nonlinear_material = true;
        push(&mut rungs, "nonlinear_material", &hw);
    }
    rungs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub rung: String,
    pub n_pfcu: usize,
    pub n_w: usize,
    pub n_ta: usize,
    pub nonlinear_material: bool,
    pub ib: usize,
    /// FPS/W per network, in the order of [`LadderReport::networks`].
    pub fps_per_watt: Vec<f64>,
    pub geomean_fps_per_watt: f64,
    pub gain_vs_baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub networks: Vec<String>,
    pub rows: Vec<LadderRow>,
}

impl LadderReport {
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].geomean_fps_per_watt >= w[0].geomean_fps_per_watt)
    }

    pub fn end_to_end_gain(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.gain_vs_baseline)
    }
}

pub fn run_ladder(
    base: &HardwareConfig,
    nets: &[NetworkSpec],
    with_nonlinear: bool,
) -> Result<LadderReport, ArchError> {
    let mut rows: Vec<LadderRow> = Vec::new();
    for rung in optimization_ladder(base, with_nonlinear) {
        let fps_per_watt = nets
            .iter()
            .map(|n| network_perf(n, &rung.hw, &rung.scheme).map(|r| r.fps_per_watt))
            .collect::<Result<Vec<_>, _>>()?;
        let g = geometric_mean(&fps_per_watt);
        let gain = rows.first().map_or(1.0, |b| g / b.geomean_fps_per_watt);
        rows.push(LadderRow {
            rung: rung.name.to_string(),
            n_pfcu: rung.hw.n_pfcu,
            n_w: rung.hw.n_w,
            n_ta: rung.hw.n_ta,
            nonlinear_material: rung.hw.nonlinear_material,
            ib: rung.scheme.ib,
            fps_per_watt,
            geomean_fps_per_watt: g,
            gain_vs_baseline: gain,
        });
    }
    Ok(LadderReport { networks: nets.iter().map(|n| n.name.clone()).collect(), rows })
}
