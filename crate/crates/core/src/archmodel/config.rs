use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ArchError;
use crate::tiling::PaddingMode;

const CG_PRESET: &str = include_str!("../../presets/cg.toml");
const NG_PRESET: &str = include_str!("../../presets/ng.toml");

/// Component powers. `adc_mw` and `dac_mw` are per converter at their
/// reference clocks and scale linearly with frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentPowers {
    pub mrr_mw: f64,
    pub laser_mw_per_waveguide: f64,
    pub adc_mw: f64,
    pub adc_ref_hz: f64,
    pub dac_mw: f64,
    pub dac_ref_hz: f64,
    pub sram_pj_per_bit: f64,
    pub sram_leakage_mw: f64,
    pub cmos_input_mw: f64,
    pub cmos_output_mw: f64,
    pub cmos_leakage_mw: f64,
    pub misc_mw_per_pfcu: f64,
}

/// Footprint in micrometres; `h` is along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dim {
    pub w: f64,
    pub h: f64,
}

impl Dim {
    pub fn area_um2(&self) -> f64 {
        self.w * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDims {
    pub mrr: Dim,
    pub splitter: Dim,
    pub photodetector: Dim,
    pub laser: Dim,
    /// Lens size at `lens_ref_waveguides` input waveguides.
    pub lens: Dim,
    pub lens_ref_waveguides: usize,
    pub waveguide_pitch: f64,
    pub devices_per_row: usize,
}

/// Areas of the electronic blocks, which come from synthesis rather than
/// from the photonic layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectronicArea {
    pub sram_mm2: f64,
    pub cmos_tile_mm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareConfig {
    pub name: String,
    pub n_pfcu: usize,
    /// Input waveguides per PFCU, which is also the 1D correlation size.
    pub n_i: usize,
    /// Active weight waveguides per PFCU.
    pub n_w: usize,
    /// Temporal accumulation depth.
    pub n_ta: usize,
    pub f_phot_hz: f64,
    pub act_bits: u32,
    pub weight_bits: u32,
    pub adc_bits: u32,
    pub pipeline_stages: usize,
    pub nonlinear_material: bool,
    pub monolithic: bool,
    pub pseudo_negative: bool,
    pub tiling_padding: PaddingMode,
    pub power: ComponentPowers,
    pub dims: ComponentDims,
    pub area: ElectronicArea,
}

impl HardwareConfig {
    pub fn cg() -> Self {
        Self::from_toml_str(CG_PRESET).expect("cg preset is valid")
    }

    pub fn ng() -> Self {
        Self::from_toml_str(NG_PRESET).expect("ng preset is valid")
    }

    /// Preset TOML source, for writing out alongside reports.
    pub fn preset_source(name: &str) -> Option<&'static str> {
        match name {
            "cg" => Some(CG_PRESET),
            "ng" => Some(NG_PRESET),
            _ => None,
        }
    }

    pub fn preset(name: &str) -> Result<Self, ArchError> {
        match Self::preset_source(name) {
            Some(src) => Self::from_toml_str(src),
            None => Err(ArchError::Config(format!("unknown preset '{name}' (expected cg or ng)"))),
        }
    }

    /// A preset name or a path to a TOML file.
    pub fn load(spec: &str) -> Result<Self, ArchError> {
        if Self::preset_source(spec).is_some() {
            Self::preset(spec)
        } else {
            Self::from_path(spec)
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ArchError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| ArchError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(src: &str) -> Result<Self, ArchError> {
        let hw: Self = toml::from_str(src).map_err(|e| ArchError::Config(e.message().to_string()))?;
        hw.validate()?;
        Ok(hw)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("hardware config serializes")
    }

    /// Lens footprint scaled to `n_i`.
    pub fn lens_dims(&self) -> Dim {
        let k = self.n_i as f64 / self.dims.lens_ref_waveguides as f64;
        Dim { w: self.dims.lens.w * k, h: self.dims.lens.h * k }
    }

    pub fn f_adc_hz(&self) -> f64 {
        self.f_phot_hz / self.n_ta as f64
    }

    /// ADC power per converter at `f_adc`.
    pub fn adc_mw_each(&self) -> f64 {
        self.power.adc_mw * self.f_adc_hz() / self.power.adc_ref_hz
    }

    /// DAC power per converter at `f_phot`.
    pub fn dac_mw_each(&self) -> f64 {
        self.power.dac_mw * self.f_phot_hz / self.power.dac_ref_hz
    }

    /// Copies the component power table of `other`, keeping counts.
    pub fn with_powers_of(mut self, other: &HardwareConfig) -> Self {
        self.power = other.power;
        self
    }

    pub fn validate(&self) -> Result<(), ArchError> {
        let bad = |m: String| Err(ArchError::Config(m));
        for (field, v) in [
            ("n_pfcu", self.n_pfcu),
            ("n_i", self.n_i),
            ("n_w", self.n_w),
            ("n_ta", self.n_ta),
            ("pipeline_stages", self.pipeline_stages),
            ("dims.devices_per_row", self.dims.devices_per_row),
            ("dims.lens_ref_waveguides", self.dims.lens_ref_waveguides),
        ] {
            if v == 0 {
                return bad(format!("{field} must be positive"));
            }
        }
        if self.n_w > self.n_i {
            return bad(format!("n_w {} exceeds n_i {}", self.n_w, self.n_i));
        }
        if !(self.f_phot_hz > 0.0) || !self.f_phot_hz.is_finite() {
            return bad("f_phot_hz must be positive".into());
        }
        for bits in [self.act_bits, self.weight_bits, self.adc_bits] {
            if !(1..=32).contains(&bits) {
                return bad(format!("bit width {bits} out of range"));
            }
        }
        let p = &self.power;
        for (field, v) in [
            ("mrr_mw", p.mrr_mw),
            ("laser_mw_per_waveguide", p.laser_mw_per_waveguide),
            ("adc_mw", p.adc_mw),
            ("dac_mw", p.dac_mw),
            ("sram_pj_per_bit", p.sram_pj_per_bit),
            ("sram_leakage_mw", p.sram_leakage_mw),
            ("cmos_input_mw", p.cmos_input_mw),
            ("cmos_output_mw", p.cmos_output_mw),
            ("cmos_leakage_mw", p.cmos_leakage_mw),
            ("misc_mw_per_pfcu", p.misc_mw_per_pfcu),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("power.{field} must be finite and nonnegative"));
            }
        }
        if !(p.adc_ref_hz > 0.0) || !(p.dac_ref_hz > 0.0) {
            return bad("reference frequencies must be positive".into());
        }
        let d = &self.dims;
        for (field, dim) in [
            ("mrr", d.mrr),
            ("splitter", d.splitter),
            ("photodetector", d.photodetector),
            ("laser", d.laser),
            ("lens", d.lens),
        ] {
            if !(dim.w > 0.0 && dim.h > 0.0) {
                return bad(format!("dims.{field} must be positive"));
            }
        }
        if !(d.waveguide_pitch > 0.0) {
            return bad("dims.waveguide_pitch must be positive".into());
        }
        if !(self.area.sram_mm2 >= 0.0 && self.area.cmos_tile_mm2 >= 0.0) {
            return bad("electronic areas must be nonnegative".into());
        }
        Ok(())
    }
}
