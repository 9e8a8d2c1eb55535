use serde::{Deserialize, Serialize};

use super::cycles::{layer_cycles, LayerCycles};
use super::power::{power_breakdown, Activity, PowerBreakdown};
use super::{ArchError, HardwareConfig, ParallelizationScheme};
use crate::tiling::TilingVariant;
use crate::workloads::{LayerSpec, NetworkSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPerf {
    pub index: usize,
    pub name: String,
    pub in_size: usize,
    pub kernel: usize,
    pub stride: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub variant: TilingVariant,
    pub steps: usize,
    pub photonic_cycles: u64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub power_w: f64,
    pub utilization: f64,
    pub occupancy: f64,
    pub macs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub network: String,
    pub config: String,
    pub scheme: ParallelizationScheme,
    pub layers: Vec<LayerPerf>,
    pub total_cycles: u64,
    pub total_macs: u64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub fps: f64,
    pub fps_per_watt: f64,
    pub edp: f64,
    pub avg_power_w: f64,
    /// Time-averaged power by component.
    pub power: PowerBreakdown,
}

/// Power while `layer` runs: every cycle busy, SRAM traffic spread over
/// the layer latency.
pub fn layer_power(hw: &HardwareConfig, scheme: &ParallelizationScheme, cycles: &LayerCycles) -> PowerBreakdown {
    let activity = Activity { duty: 1.0, sram_bits_per_s: cycles.sram_bits() / cycles.latency_s };
    power_breakdown(hw, scheme, &activity)
}

fn layer_name(index: usize, layer: &LayerSpec) -> String {
    layer.name.clone().unwrap_or_else(|| format!("layer{index}"))
}

pub fn network_perf(
    net: &NetworkSpec,
    hw: &HardwareConfig,
    scheme: &ParallelizationScheme,
) -> Result<PerfReport, ArchError> {
    scheme.check(hw.n_pfcu)?;
    let mut layers = Vec::with_capacity(net.layers.len());
    let mut energy = 0.0;
    let mut latency = 0.0;
    let mut cycles = 0u64;
    let mut power_time = PowerBreakdown::default();
    for (index, layer) in net.layers.iter().enumerate() {
        let name = layer_name(index, layer);
        let c = layer_cycles(layer, hw, scheme).map_err(|e| ArchError::LayerInfeasible {
            index,
            name: name.clone(),
            reason: e.to_string(),
        })?;
        let p = layer_power(hw, scheme, &c);
        let e = p.total * c.latency_s;
        energy += e;
        latency += c.latency_s;
        cycles += c.total_cycles();
        power_time = power_time.add(&p.scaled(c.latency_s));
        layers.push(LayerPerf {
            index,
            name,
            in_size: layer.in_size,
            kernel: layer.kernel,
            stride: layer.stride,
            in_channels: layer.in_channels,
            out_channels: layer.out_channels,
            variant: c.plan.variant,
            steps: c.plan.steps,
            photonic_cycles: c.photonic_cycles,
            latency_s: c.latency_s,
            energy_j: e,
            power_w: p.total,
            utilization: c.utilization,
            occupancy: c.occupancy,
            macs: layer.macs(),
        });
    }
    let avg_power_w = energy / latency;
    let fps = 1.0 / latency;
    Ok(PerfReport {
        network: net.name.clone(),
        config: hw.name.clone(),
        scheme: *scheme,
        layers,
        total_cycles: cycles,
        total_macs: net.total_macs(),
        latency_s: latency,
        energy_j: energy,
        fps,
        fps_per_watt: fps / avg_power_w,
        edp: energy * latency,
        avg_power_w,
        power: power_time.scaled(1.0 / latency),
    })
}

/// Geometric mean; `NaN` for an empty slice or any nonpositive value.
pub fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|&v| !(v > 0.0)) {
        return f64::NAN;
    }
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}
