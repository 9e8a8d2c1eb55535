use serde::{Deserialize, Serialize};

use super::{HardwareConfig, ParallelizationScheme};

/// Average power by component, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub dac: f64,
    pub adc: f64,
    pub mrr: f64,
    pub laser: f64,
    pub sram: f64,
    pub cmos: f64,
    pub misc: f64,
    pub total: f64,
}

impl PowerBreakdown {
    pub fn parts(&self) -> [(&'static str, f64); 7] {
        [
            ("dac", self.dac),
            ("adc", self.adc),
            ("mrr", self.mrr),
            ("laser", self.laser),
            ("sram", self.sram),
            ("cmos", self.cmos),
            ("misc", self.misc),
        ]
    }

    fn with_total(mut self) -> Self {
        self.total = self.parts().iter().map(|(_, w)| w).sum();
        self
    }

    pub fn share(&self, part: f64) -> f64 {
        if self.total > 0.0 {
            part / self.total
        } else {
            0.0
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            dac: self.dac * k,
            adc: self.adc * k,
            mrr: self.mrr * k,
            laser: self.laser * k,
            sram: self.sram * k,
            cmos: self.cmos * k,
            misc: self.misc * k,
            total: 0.0,
        }
        .with_total()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            dac: self.dac + o.dac,
            adc: self.adc + o.adc,
            mrr: self.mrr + o.mrr,
            laser: self.laser + o.laser,
            sram: self.sram + o.sram,
            cmos: self.cmos + o.cmos,
            misc: self.misc + o.misc,
            total: 0.0,
        }
        .with_total()
    }
}

/// How busy the machine is. `duty` scales every power-gated part; the
/// laser and leakage stay on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub duty: f64,
    pub sram_bits_per_s: f64,
}

impl Activity {
    pub fn idle() -> Self {
        Self { duty: 0.0, sram_bits_per_s: 0.0 }
    }

    /// Every cycle busy, streaming a full input tile and `taps` weights per
    /// PFCU each cycle.
    pub fn peak(hw: &HardwareConfig, scheme: &ParallelizationScheme, taps: usize) -> Self {
        let bits = scheme.cp * hw.n_i * hw.act_bits as usize + hw.n_pfcu * taps * hw.weight_bits as usize;
        Self { duty: 1.0, sram_bits_per_s: bits as f64 * hw.f_phot_hz }
    }
}

pub fn converter_counts(hw: &HardwareConfig, scheme: &ParallelizationScheme) -> (usize, usize) {
    let dacs = scheme.cp * hw.n_i + hw.n_pfcu * hw.n_w;
    let adcs = scheme.ib * hw.n_i;
    (dacs, adcs)
}

pub fn mrr_count(hw: &HardwareConfig, scheme: &ParallelizationScheme) -> usize {
    let nonlinear = if hw.nonlinear_material { 0 } else { hw.n_i * hw.n_pfcu };
    scheme.cp * hw.n_i + hw.n_pfcu * hw.n_w + nonlinear
}

pub fn power_breakdown(hw: &HardwareConfig, scheme: &ParallelizationScheme, activity: &Activity) -> PowerBreakdown {
    let p = &hw.power;
    let duty = activity.duty.clamp(0.0, 1.0);
    let mw = 1e-3;
    let (dacs, adcs) = converter_counts(hw, scheme);
    let waveguides = hw.n_pfcu * (hw.n_i + hw.n_w);
    let n = hw.n_pfcu as f64;
    let cmos_dynamic = n * (p.cmos_input_mw + p.cmos_output_mw * hw.f_adc_hz() / hw.f_phot_hz);
    PowerBreakdown {
        dac: duty * hw.dac_mw_each() * dacs as f64 * mw,
        adc: duty * hw.adc_mw_each() * adcs as f64 * mw,
        mrr: duty * p.mrr_mw * mrr_count(hw, scheme) as f64 * mw,
        laser: p.laser_mw_per_waveguide * waveguides as f64 * mw,
        sram: duty * p.sram_pj_per_bit * 1e-12 * activity.sram_bits_per_s + p.sram_leakage_mw * mw,
        cmos: (duty * cmos_dynamic + n * p.cmos_leakage_mw) * mw,
        misc: duty * n * p.misc_mw_per_pfcu * mw,
        total: 0.0,
    }
    .with_total()
}
