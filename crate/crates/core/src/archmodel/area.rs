//! Floorplan area estimate.
//!
//! A PFCU is a weight MRR bank, a lens, the Fourier-plane nonlinearity
//! (photodetector bank driving an MRR bank, or a thin passive material),
//! a second lens and the output photodetector bank. Banks hold rows of
//! `devices_per_row` devices. Lens aperture and focal length grow in
//! proportion to the number of input waveguides.
//!
//! On a two-chiplet machine the PFCU folds after the Fourier plane so both
//! the weight MRRs and the output detectors sit at the CMOS edge. The two
//! halves sit side by side with the waveguide bundle between them, and the
//! bundle turns around in a U-bend. A monolithic machine runs straight.
//!
//! PFCUs stand in one line. A feed strip along the line holds the lasers,
//! the shared input modulators, the broadcast bus and its splitter tree.
//! The PIC is the bounding box; whatever is not a device counts as
//! waveguide routing.

use serde::{Deserialize, Serialize};

use super::HardwareConfig;

const UM2_PER_MM2: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaBreakdown {
    pub pfcu_width_mm: f64,
    pub pfcu_height_mm: f64,
    pub pfcu_mm2: f64,
    pub feed_strip_mm2: f64,
    pub lens_mm2: f64,
    pub mrr_mm2: f64,
    pub photodetector_mm2: f64,
    pub laser_mm2: f64,
    pub splitter_mm2: f64,
    pub waveguide_routing_mm2: f64,
    /// Photonic bounding box, all PFCUs plus the feed strip.
    pub pic_mm2: f64,
    pub sram_mm2: f64,
    pub cmos_mm2: f64,
    pub total_mm2: f64,
    /// PIC edge length along the PFCU line.
    pub pic_width_mm: f64,
    pub folded: bool,
}

fn bank_rows(count: usize, per_row: usize) -> usize {
    count.div_ceil(per_row)
}

fn lasers(hw: &HardwareConfig) -> usize {
    // one per PFCU for the weights, one for the shared inputs
    hw.n_pfcu + 1
}

pub fn area_breakdown(hw: &HardwareConfig) -> AreaBreakdown {
    let d = &hw.dims;
    let row = d.devices_per_row;
    let bank_h = |count: usize, dev_h: f64| bank_rows(count, row) as f64 * dev_h;
    let bank_w = |count: usize, dev_w: f64| count.min(row) as f64 * dev_w;
    let bundle = hw.n_i as f64 * d.waveguide_pitch;
    let lens_dim = hw.lens_dims();

    let weight_bank = bank_h(hw.n_w, d.mrr.h);
    let output_bank = bank_h(hw.n_i, d.photodetector.h);
    let nonlinearity =
        if hw.nonlinear_material { 0.0 } else { bank_h(hw.n_i, d.photodetector.h) + bank_h(hw.n_i, d.mrr.h) };
    let folded = !hw.monolithic;
    let (width, height) = if folded {
        let first = weight_bank + lens_dim.h + nonlinearity;
        let second = lens_dim.h + output_bank;
        let u_turn = (lens_dim.w + bundle) / 2.0;
        (2.0 * lens_dim.w + bundle, first.max(second) + u_turn)
    } else {
        let width = lens_dim.w.max(bundle).max(bank_w(hw.n_i, d.photodetector.w)).max(bank_w(hw.n_i, d.mrr.w));
        (width, weight_bank + 2.0 * lens_dim.h + nonlinearity + output_bank)
    };

    let n = hw.n_pfcu as f64;
    let pic_width = n * width;
    let splitter_stages = (usize::BITS - (hw.n_pfcu - 1).leading_zeros()) as f64;
    let strip_h = d.laser.h + bank_h(hw.n_i, d.mrr.h) + bundle + splitter_stages * d.splitter.h;

    let nl_devices = if hw.nonlinear_material { 0 } else { hw.n_i };
    let lens = n * 2.0 * lens_dim.area_um2();
    let mrr = (n * (hw.n_w + nl_devices) as f64 + hw.n_i as f64) * d.mrr.area_um2();
    let pd = n * (hw.n_i + nl_devices) as f64 * d.photodetector.area_um2();
    let laser = lasers(hw) as f64 * d.laser.area_um2();
    let splitter = (hw.n_pfcu - 1) as f64 * hw.n_i as f64 * d.splitter.area_um2();
    let pfcu = width * height;
    let strip = pic_width * strip_h;
    let pic = n * pfcu + strip;
    let routing = pic - lens - mrr - pd - laser - splitter;

    let sram = hw.area.sram_mm2;
    let cmos = n * hw.area.cmos_tile_mm2;
    let pic_mm2 = pic / UM2_PER_MM2;
    AreaBreakdown {
        pfcu_width_mm: width / 1e3,
        pfcu_height_mm: height / 1e3,
        pfcu_mm2: pfcu / UM2_PER_MM2,
        feed_strip_mm2: strip / UM2_PER_MM2,
        lens_mm2: lens / UM2_PER_MM2,
        mrr_mm2: mrr / UM2_PER_MM2,
        photodetector_mm2: pd / UM2_PER_MM2,
        laser_mm2: laser / UM2_PER_MM2,
        splitter_mm2: splitter / UM2_PER_MM2,
        waveguide_routing_mm2: routing / UM2_PER_MM2,
        pic_mm2,
        sram_mm2: sram,
        cmos_mm2: cmos,
        total_mm2: pic_mm2 + sram + cmos,
        pic_width_mm: pic_width / 1e3,
        folded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_areas_fit_in_bounding_box() {
        for hw in [HardwareConfig::cg(), HardwareConfig::ng()] {
            let a = area_breakdown(&hw);
            assert!(a.waveguide_routing_mm2 > 0.0, "{a:?}");
            let parts =
                a.lens_mm2 + a.mrr_mm2 + a.photodetector_mm2 + a.laser_mm2 + a.splitter_mm2 + a.waveguide_routing_mm2;
            assert!((parts - a.pic_mm2).abs() < 1e-9);
        }
    }

    #[test]
    fn single_mrr_footprint() {
        let hw = HardwareConfig::cg();
        assert_eq!(hw.dims.mrr.area_um2(), 15.0 * 17.0);
    }

    #[test]
    fn more_waveguides_more_area() {
        let mut hw = HardwareConfig::cg();
        let a = area_breakdown(&hw).pic_mm2;
        hw.n_i = 300;
        assert!(area_breakdown(&hw).pic_mm2 > a);
    }
}
