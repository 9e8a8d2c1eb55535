use serde::{Deserialize, Serialize};

use super::{ArchError, HardwareConfig, ParallelizationScheme};
use crate::tiling::{plan_tiling, TilingPlan, TilingVariant};
use crate::workloads::LayerSpec;

/// Cycle and traffic accounting for one layer.
///
/// Each cycle, `IB` PFCUs work on different filters of the same input tile
/// and `CP` such groups work on different input channels. Strided layers
/// run at unit stride and are subsampled digitally, so stride does not
/// change the cycle count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCycles {
    pub plan: TilingPlan,
    /// Filter passes per input channel group (`ceil(m * C_out / IB)`, with
    /// `m = 2` for pseudo-negative pairs).
    pub filter_passes: usize,
    pub channel_passes: usize,
    pub photonic_cycles: u64,
    /// Pipeline fill, `pipeline_stages - 1` cycles.
    pub fill_cycles: u64,
    pub latency_s: f64,
    /// Nonzero kernel taps loaded per PFCU per cycle.
    pub weight_taps: usize,
    /// Useful outputs over computed outputs.
    pub utilization: f64,
    /// Mean fraction of input waveguides carrying data.
    pub occupancy: f64,
    pub sram_input_bits: f64,
    pub sram_weight_bits: f64,
    pub sram_output_bits: f64,
}

impl LayerCycles {
    pub fn total_cycles(&self) -> u64 {
        self.photonic_cycles + self.fill_cycles
    }

    pub fn sram_bits(&self) -> f64 {
        self.sram_input_bits + self.sram_weight_bits + self.sram_output_bits
    }
}

/// Input samples carried by step `k` of `plan`, padding zeros included.
fn tile_samples(plan: &TilingPlan) -> f64 {
    let w = plan.row_width as f64;
    match plan.variant {
        TilingVariant::RowTiling => {
            // every step but the last carries rows_per_step rows
            let full = (plan.steps - 1) * plan.valid_rows_per_step;
            let last = plan.s_i - full;
            let rows = (plan.steps - 1) * (plan.valid_rows_per_step + plan.s_k - 1) + last + plan.s_k - 1;
            rows as f64 * w / plan.steps as f64
        }
        TilingVariant::PartialRowTiling => plan.s_k as f64 * w / plan.kernel_row_groups as f64,
        TilingVariant::RowPartitioning => w / plan.partitions_per_row as f64,
    }
}

fn weight_taps(plan: &TilingPlan) -> usize {
    match plan.variant {
        TilingVariant::RowTiling => plan.s_k * plan.s_k,
        TilingVariant::PartialRowTiling => plan.s_k * plan.rows_per_step.min(plan.s_k),
        TilingVariant::RowPartitioning => plan.s_k,
    }
}

fn spatial_utilization(plan: &TilingPlan) -> f64 {
    match plan.variant {
        TilingVariant::RowTiling => plan.s_i as f64 / (plan.steps * plan.valid_rows_per_step) as f64,
        TilingVariant::PartialRowTiling => plan.s_k as f64 / (plan.kernel_row_groups * plan.rows_per_step) as f64,
        TilingVariant::RowPartitioning => plan.row_width as f64 / (plan.partitions_per_row * plan.n_conv) as f64,
    }
}

pub fn layer_cycles(
    layer: &LayerSpec,
    hw: &HardwareConfig,
    scheme: &ParallelizationScheme,
) -> Result<LayerCycles, ArchError> {
    scheme.check(hw.n_pfcu)?;
    layer.validate(0).map_err(|e| ArchError::Layer(e.to_string()))?;
    let plan = plan_tiling(layer.in_size, layer.kernel, hw.n_i, hw.tiling_padding)?;
    let weight_taps = weight_taps(&plan);
    if weight_taps > hw.n_w {
        return Err(ArchError::TooManyTaps { taps: weight_taps, n_w: hw.n_w });
    }
    let m = if hw.pseudo_negative { 2 } else { 1 };
    let filter_passes = (m * layer.out_channels).div_ceil(scheme.ib);
    let channel_passes = layer.in_channels.div_ceil(scheme.cp);
    let photonic_cycles = (filter_passes * channel_passes * plan.steps) as u64;
    let fill_cycles = (hw.pipeline_stages - 1) as u64;
    let latency_s = (photonic_cycles + fill_cycles) as f64 / hw.f_phot_hz;

    let discard = layer.out_size() as f64 / layer.in_size as f64;
    let utilization = spatial_utilization(&plan) * discard * discard;
    let samples = tile_samples(&plan);
    let occupancy = (samples / hw.n_i as f64).min(1.0);

    let cycles = photonic_cycles as f64;
    let sram_input_bits = cycles * scheme.cp as f64 * samples * hw.act_bits as f64;
    let sram_weight_bits = cycles * hw.n_pfcu as f64 * weight_taps as f64 * hw.weight_bits as f64;
    let out = layer.out_size() as f64;
    let sram_output_bits = out * out * layer.out_channels as f64 * hw.act_bits as f64;

    Ok(LayerCycles {
        plan,
        filter_passes,
        channel_passes,
        photonic_cycles,
        fill_cycles,
        latency_s,
        weight_taps,
        utilization,
        occupancy,
        sram_input_bits,
        sram_weight_bits,
        sram_output_bits,
    })
}
