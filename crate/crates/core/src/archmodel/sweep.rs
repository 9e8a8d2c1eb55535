//! PFCU count versus waveguides per PFCU under a fixed PIC area budget.

use serde::{Deserialize, Serialize};

use super::area::area_breakdown;
use super::parallel::optimize_parallelization;
use super::perf::{geometric_mean, network_perf};
use super::{ArchError, HardwareConfig};
use crate::workloads::NetworkSpec;

/// Largest `n_i` whose PIC fits in `budget_mm2` with `n_pfcu` PFCUs, or
/// `None` if even `n_i = n_w` does not fit.
pub fn max_waveguides_under_budget(template: &HardwareConfig, n_pfcu: usize, budget_mm2: f64) -> Option<usize> {
    let mut hw = template.clone();
    hw.n_pfcu = n_pfcu;
    let fits = |n_i: usize, hw: &mut HardwareConfig| {
        hw.n_i = n_i;
        area_breakdown(hw).pic_mm2 <= budget_mm2
    };
    let mut lo = template.n_w;
    if !fits(lo, &mut hw) {
        return None;
    }
    let mut hi = lo.max(1);
    while fits(hi * 2, &mut hw) {
        hi *= 2;
    }
    let mut hi = hi * 2;
    // fits(lo) and !fits(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid, &mut hw) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_pfcu: usize,
    pub n_i: usize,
    pub pic_mm2: f64,
    pub ib: usize,
    pub geomean_fps_per_watt: f64,
    /// Relative to the best row.
    pub normalized: f64,
}

pub fn waveguide_pfcu_sweep(
    template: &HardwareConfig,
    pfcu_counts: &[usize],
    budget_mm2: f64,
    nets: &[NetworkSpec],
) -> Result<Vec<SweepRow>, ArchError> {
    let mut rows = Vec::new();
    for &n_pfcu in pfcu_counts {
        let Some(n_i) = max_waveguides_under_budget(template, n_pfcu, budget_mm2) else {
            continue;
        };
        let mut hw = template.clone();
        hw.n_pfcu = n_pfcu;
        hw.n_i = n_i;
        let scheme = optimize_parallelization(n_pfcu, hw.n_ta)?.best;
        let fpw = nets
            .iter()
            .map(|n| network_perf(n, &hw, &scheme).map(|r| r.fps_per_watt))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(SweepRow {
            n_pfcu,
            n_i,
            pic_mm2: area_breakdown(&hw).pic_mm2,
            ib: scheme.ib,
            geomean_fps_per_watt: geometric_mean(&fpw),
            normalized: 0.0,
        });
    }
    let best = rows.iter().map(|r| r.geomean_fps_per_watt).fold(0.0, f64::max);
    for r in &mut rows {
        r.normalized = r.geomean_fps_per_watt / best;
    }
    Ok(rows)
}
