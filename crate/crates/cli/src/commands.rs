use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use jtcsim::archmodel::area::area_breakdown;
use jtcsim::archmodel::ladder::{baseline, run_ladder};
use jtcsim::archmodel::power::converter_counts;
use jtcsim::archmodel::sweep::waveguide_pfcu_sweep;
use jtcsim::archmodel::{optimize_parallelization, power_breakdown, Activity, LadderReport};
use jtcsim::fidelity::{layer_fidelity_sim, random_layer_operands};
use jtcsim::optics::{extract_correlation_term, jtc_correlate, minimum_separation, Signal1D};
use jtcsim::tiling::{conv2d_reference, conv2d_via_1d, edge_effect_columns, plan_tiling, Image2D, Kernel2D};
use jtcsim::workloads::BUILTIN_NETWORKS;
use jtcsim::{
    builtin_network, parse_network, AccumulationConfig, ConvMode, Detection, DirectCorrelator, HardwareConfig,
    JtcConfig, JtcCorrelator, LayerSpec, NetworkSpec, OpticsError, PaddingMode, PerfReport, PowerBreakdown,
    QuantConfig, TilingError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::report::{num, Report, RunManifest, Table};
use crate::{
    AreaArgs, Backend, ConvCheckArgs, Demo, DetectionArg, FidelityArgs, JtcDemoArgs, OptimizeArgs, PaddingArg,
    PerfArgs, PowerArgs,
};

/// Exit code for a failed check.
pub const CHECK_FAILED: i32 = 1;
/// Exit code for invalid input or configuration, and any other error.
pub const INVALID: i32 = 2;

fn invalid(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("{e}")
}

fn load_network(spec: &str) -> Result<NetworkSpec> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        parse_network(&text).map_err(invalid)
    } else {
        builtin_network(spec).map_err(invalid)
    }
}

fn load_networks(specs: &[String]) -> Result<Vec<NetworkSpec>> {
    if specs.iter().any(|s| s == "all") {
        return BUILTIN_NETWORKS.iter().map(|n| load_network(n)).collect();
    }
    specs.iter().map(|s| load_network(s)).collect()
}

pub fn conv_check(manifest: RunManifest, args: &ConvCheckArgs) -> Result<Report> {
    let padding = match args.padding {
        PaddingArg::None => PaddingMode::None,
        PaddingArg::Zero => PaddingMode::ZeroPadEdges,
    };
    let plan = match plan_tiling(args.size, args.kernel, args.n_conv, padding) {
        Ok(p) => p,
        Err(e @ (TilingError::Infeasible { .. } | TilingError::KernelTooLarge { .. })) => return Err(invalid(e)),
        Err(e) => return Err(e.into()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(manifest.seed);
    // the optical correlator only takes nonnegative operands
    let signed = args.backend == Backend::Direct;
    let draw = |r: &mut ChaCha8Rng| -> f64 {
        if args.integers {
            let v = r.random_range(0..16) as f64;
            if signed {
                v - 8.0
            } else {
                v
            }
        } else if signed {
            r.random_range(-1.0..1.0)
        } else {
            r.random::<f64>()
        }
    };
    let img = Image2D::from_fn(args.size, |_, _| draw(&mut rng));
    let ker = Kernel2D::from_fn(args.kernel, |_, _| draw(&mut rng));
    let got = match args.backend {
        Backend::Direct => conv2d_via_1d(&img, &ker, args.n_conv, &DirectCorrelator, padding)?,
        Backend::Jtc => conv2d_via_1d(&img, &ker, args.n_conv, &JtcCorrelator, padding)?,
    };
    let want = conv2d_reference(&img, &ker, ConvMode::Same)?;
    let scale = want.data().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = match args.backend {
        Backend::Direct => 0.0,
        Backend::Jtc => 1e-9 * scale,
    };

    #[derive(Serialize)]
    struct Mismatch {
        row: usize,
        col: usize,
        got: f64,
        want: f64,
        seam: bool,
    }
    let seams = edge_effect_columns(args.size, args.kernel);
    let mut mismatches = Vec::new();
    let mut max_diff = 0.0f64;
    let mut max_interior_diff = 0.0f64;
    for r in 0..args.size {
        for c in 0..args.size {
            let (g, w) = (got.get(r, c), want.get(r, c));
            let d = (g - w).abs();
            let seam = seams.contains(&c);
            max_diff = max_diff.max(d);
            if !seam {
                max_interior_diff = max_interior_diff.max(d);
            }
            if d > tol {
                mismatches.push(Mismatch { row: r, col: c, got: g, want: w, seam });
            }
        }
    }
    let passed = match padding {
        PaddingMode::ZeroPadEdges => mismatches.is_empty(),
        PaddingMode::None => mismatches.iter().all(|m| m.seam),
    };
    let mut table = Table::new(&["row", "col", "got", "want", "seam"]);
    for m in &mismatches {
        table.push(vec![m.row.to_string(), m.col.to_string(), num(m.got), num(m.want), m.seam.to_string()]);
    }
    let body = json!({
        "plan": plan,
        "backend": format!("{:?}", args.backend).to_lowercase(),
        "tolerance": tol,
        "max_abs_diff": max_diff,
        "max_abs_diff_off_seams": max_interior_diff,
        "seam_columns": seams,
        "mismatch_count": mismatches.len(),
        "mismatches": mismatches,
        "passed": passed,
    });
    Ok(Report::new(manifest, body, table)?.with_exit_code(if passed { 0 } else { CHECK_FAILED }))
}

fn scheme_for(hw: &HardwareConfig, ib: Option<usize>) -> Result<jtcsim::ParallelizationScheme> {
    match ib {
        Some(ib) => jtcsim::ParallelizationScheme::new(ib, hw.n_pfcu, hw.n_ta).map_err(invalid),
        None => Ok(optimize_parallelization(hw.n_pfcu, hw.n_ta).map_err(invalid)?.best),
    }
}

fn power_shares(p: &PowerBreakdown) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (name, w) in p.parts() {
        m.insert(name.to_string(), json!(p.share(w)));
    }
    serde_json::Value::Object(m)
}

fn ladder_report(manifest: RunManifest, hw: &HardwareConfig, nets: &[NetworkSpec], nonlinear: bool) -> Result<Report> {
    let report: LadderReport = run_ladder(hw, nets, nonlinear).map_err(invalid)?;
    let mut headers = vec!["rung", "n_pfcu", "n_w", "n_ta", "nonlinear_material", "ib"];
    let per_net: Vec<String> = report.networks.iter().map(|n| format!("fps_per_watt_{n}")).collect();
    headers.extend(per_net.iter().map(String::as_str));
    headers.extend(["fps_per_watt", "gain_vs_baseline"]);
    let mut table = Table::new(&headers);
    for r in &report.rows {
        let mut row = vec![
            r.rung.clone(),
            r.n_pfcu.to_string(),
            r.n_w.to_string(),
            r.n_ta.to_string(),
            r.nonlinear_material.to_string(),
            r.ib.to_string(),
        ];
        row.extend(r.fps_per_watt.iter().map(|&v| num(v)));
        row.push(num(r.geomean_fps_per_watt));
        row.push(num(r.gain_vs_baseline));
        table.push(row);
    }
    let body = json!({
        "ladder": report,
        "monotone": report.is_monotone(),
        "end_to_end_gain": report.end_to_end_gain(),
    });
    Report::new(manifest, body, table)
}

pub fn perf(manifest: RunManifest, hw: &HardwareConfig, args: &PerfArgs) -> Result<Report> {
    let nets = load_networks(&args.network)?;
    if args.ladder {
        return ladder_report(manifest, hw, &nets, args.nonlinear || hw.nonlinear_material);
    }
    let scheme = scheme_for(hw, args.ib)?;
    let reports: Vec<PerfReport> = nets
        .iter()
        .map(|n| jtcsim::archmodel::network_perf(n, hw, &scheme))
        .collect::<Result<_, _>>()
        .map_err(invalid)?;
    let area = area_breakdown(hw);

    let mut summary = Table::new(&[
        "network",
        "fps",
        "fps_per_watt",
        "edp",
        "avg_power_w",
        "latency_s",
        "energy_j",
        "total_cycles",
        "total_macs",
        "dac_share",
        "adc_share",
        "mrr_share",
        "laser_share",
        "sram_share",
        "cmos_share",
        "misc_share",
    ]);
    let mut layers = Table::new(&[
        "network",
        "index",
        "name",
        "in_size",
        "kernel",
        "stride",
        "in_channels",
        "out_channels",
        "variant",
        "steps",
        "photonic_cycles",
        "latency_s",
        "energy_j",
        "power_w",
        "utilization",
        "occupancy",
        "macs",
    ]);
    let mut networks = Vec::new();
    for r in &reports {
        let mut row = vec![
            r.network.clone(),
            num(r.fps),
            num(r.fps_per_watt),
            num(r.edp),
            num(r.avg_power_w),
            num(r.latency_s),
            num(r.energy_j),
            r.total_cycles.to_string(),
            r.total_macs.to_string(),
        ];
        row.extend(r.power.parts().iter().map(|(_, w)| num(r.power.share(*w))));
        summary.push(row);
        for l in &r.layers {
            layers.push(vec![
                r.network.clone(),
                l.index.to_string(),
                l.name.clone(),
                l.in_size.to_string(),
                l.kernel.to_string(),
                l.stride.to_string(),
                l.in_channels.to_string(),
                l.out_channels.to_string(),
                serde_json::to_value(l.variant)?.as_str().unwrap_or_default().to_string(),
                l.steps.to_string(),
                l.photonic_cycles.to_string(),
                num(l.latency_s),
                num(l.energy_j),
                num(l.power_w),
                num(l.utilization),
                num(l.occupancy),
                l.macs.to_string(),
            ]);
        }
        let mut v = serde_json::to_value(r)?;
        v["power_shares"] = power_shares(&r.power);
        networks.push(v);
    }
    let fpw: Vec<f64> = reports.iter().map(|r| r.fps_per_watt).collect();
    let fps: Vec<f64> = reports.iter().map(|r| r.fps).collect();
    let geo_fpw = jtcsim::archmodel::geometric_mean(&fpw);
    let geo_fps = jtcsim::archmodel::geometric_mean(&fps);
    if reports.len() > 1 {
        let mut row = vec!["geomean".to_string(), num(geo_fps), num(geo_fpw)];
        row.resize(summary.headers.len(), String::new());
        summary.push(row);
    }
    let body = json!({
        "config": hw,
        "scheme": scheme,
        "networks": networks,
        "geomean": { "fps": geo_fps, "fps_per_watt": geo_fpw },
        "area": area,
    });
    Ok(Report::new(manifest, body, summary)?.with_table("perf_layers", layers))
}

fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| invalid(format!("{}: '{t}': {e}", path.display()))))
        .collect()
}

/// A row-tiled 16x16 image correlated with a tiled 3x3 kernel, 256 input
/// samples in all.
fn tiled_demo(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s_i, s_k) = (16, 3);
    let s: Vec<f64> = (0..s_i * s_i).map(|_| rng.random::<f64>()).collect();
    let mut k = vec![0.0; (s_k - 1) * s_i + s_k];
    for r in 0..s_k {
        for c in 0..s_k {
            k[r * s_i + c] = rng.random::<f64>();
        }
    }
    (s, k)
}

pub fn jtc_demo(manifest: RunManifest, args: &JtcDemoArgs) -> Result<Report> {
    let (s, k) = match (&args.signal, &args.kernel) {
        (Some(sp), Some(kp)) => (read_signal(sp)?, read_signal(kp)?),
        (None, None) => match args.demo {
            Demo::Impulses | Demo::Overlap => (vec![1.0], vec![1.0]),
            Demo::Tiled256 => tiled_demo(manifest.seed),
        },
        _ => bail!("--signal and --kernel go together"),
    };
    let s = Signal1D::nonnegative(s).map_err(invalid)?;
    let k = Signal1D::nonnegative(k).map_err(invalid)?;
    let auto = JtcConfig::auto(s.len(), k.len());
    let cfg = match (args.plane, args.demo) {
        (Some(n), _) => JtcConfig::new(n, args.offset_s.unwrap_or(0), args.offset_k.unwrap_or(auto.offset_k)),
        (None, Demo::Impulses) => JtcConfig::new(16, 2, 3),
        // d = 4 on 8 samples puts +d and -d on the same spot
        (None, Demo::Overlap) => JtcConfig::new(8, 1, 2),
        (None, Demo::Tiled256) => auto,
    };
    let cfg = JtcConfig {
        offset_s: args.offset_s.unwrap_or(cfg.offset_s),
        offset_k: args.offset_k.unwrap_or(cfg.offset_k),
        ..cfg
    };
    let out = match jtc_correlate(&s, &k, &cfg) {
        Ok(o) => o,
        Err(e @ OpticsError::SeparationViolation(_)) => return Err(invalid(e)),
        Err(e) => return Err(e.into()),
    };
    let term = extract_correlation_term(&out, s.len(), k.len())?;
    let direct = jtcsim::cross_correlate_full(s.samples(), k.samples());
    let peak = out.plane.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // round-off from the two transforms is far below this floor
    let floor = 1e-9 * peak;
    let plane: Vec<f64> = out.plane.iter().map(|&v| if v.abs() <= floor { 0.0 } else { v }).collect();
    let max_err = term.samples().iter().zip(&direct).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let mut table = Table::new(&["position", "value"]);
    for (i, v) in plane.iter().enumerate() {
        table.push(vec![i.to_string(), num(*v)]);
    }
    let body = json!({
        "plane_size": out.plane_size(),
        "signal_len": s.len(),
        "kernel_len": k.len(),
        "offset_s": cfg.offset_s,
        "offset_k": cfg.offset_k,
        "separation": out.separation(),
        "minimum_separation": minimum_separation(s.len(), k.len()),
        "term_centers": out.term_centers,
        "forward_window": [out.forward_window().start, out.forward_window().end],
        "mirror_window": [out.mirror_window().start, out.mirror_window().end],
        "terms_disjoint": out.terms_disjoint(),
        "imag_residue": out.imag_residue,
        "max_abs_error_vs_direct": max_err,
        "nonzero_positions": plane.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect::<Vec<_>>(),
        "plane": plane,
    });
    let ok = out.terms_disjoint();
    Ok(Report::new(manifest, body, table)?.with_exit_code(if ok { 0 } else { CHECK_FAILED }))
}

pub fn fidelity_sweep(manifest: RunManifest, hw: &HardwareConfig, args: &FidelityArgs) -> Result<Report> {
    let layer = LayerSpec::new(args.size, args.kernel, 1, args.in_channels, args.out_channels);
    layer.validate(0).map_err(invalid)?;
    let q = QuantConfig {
        act_bits: args.act_bits.unwrap_or(hw.act_bits),
        weight_bits: args.weight_bits.unwrap_or(hw.weight_bits),
        adc_bits: args.adc_bits.unwrap_or(hw.adc_bits),
    };
    q.validate().map_err(invalid)?;
    let detection = match args.detection {
        DetectionArg::Linear => Detection::Linear,
        DetectionArg::Square => Detection::Square,
        DetectionArg::SquareDifference => Detection::SquareDifference,
    };
    let n_conv = args.n_conv.unwrap_or(hw.n_i);
    let depths = &args.depths;
    if depths.is_empty() {
        bail!("no depths given");
    }
    let mut sums = vec![[0.0f64; 3]; depths.len()];
    for l in 0..args.layers {
        let layer_seed = manifest.seed.wrapping_add(l as u64);
        let (w, x) = random_layer_operands(&layer, layer_seed);
        for (i, &depth) in depths.iter().enumerate() {
            let a = AccumulationConfig { depth, detection, snr_db: args.snr_db };
            let r = layer_fidelity_sim(&layer, &w, &x, n_conv, &q, &a, layer_seed).map_err(invalid)?;
            sums[i][0] += r.stats.mean_abs_error;
            sums[i][1] += r.stats.mean_abs_error_vs_quantized;
            sums[i][2] += r.stats.relative_error;
        }
    }
    let n = args.layers.max(1) as f64;
    #[derive(Serialize)]
    struct Row {
        depth: usize,
        mean_abs_error: f64,
        mean_abs_error_vs_quantized: f64,
        relative_error: f64,
    }
    let rows: Vec<Row> = depths
        .iter()
        .zip(&sums)
        .map(|(&depth, s)| Row {
            depth,
            mean_abs_error: s[0] / n,
            mean_abs_error_vs_quantized: s[1] / n,
            relative_error: s[2] / n,
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].mean_abs_error <= w[0].mean_abs_error);
    let mut table = Table::new(&["depth", "mean_abs_error", "mean_abs_error_vs_quantized", "relative_error"]);
    for r in &rows {
        table.push(vec![
            r.depth.to_string(),
            num(r.mean_abs_error),
            num(r.mean_abs_error_vs_quantized),
            num(r.relative_error),
        ]);
    }
    let body = json!({
        "layer": layer,
        "layers": args.layers,
        "n_conv": n_conv,
        "quant": q,
        "detection": detection,
        "snr_db": args.snr_db,
        "rows": rows,
        "monotone": monotone,
    });
    let code = if args.check && !monotone { CHECK_FAILED } else { 0 };
    Ok(Report::new(manifest, body, table)?.with_exit_code(code))
}

pub fn optimize(manifest: RunManifest, hw: &HardwareConfig, args: &OptimizeArgs) -> Result<Report> {
    let n_pfcu = args.n_pfcu.unwrap_or(hw.n_pfcu);
    let n_ta = args.n_ta.unwrap_or(hw.n_ta);
    let r = optimize_parallelization(n_pfcu, n_ta).map_err(invalid)?;
    let mut table = Table::new(&["ib", "cp", "objective", "objective_exact", "optimal"]);
    for c in &r.candidates {
        table.push(vec![
            c.ib.to_string(),
            c.cp.to_string(),
            num(c.objective),
            c.objective_exact.clone(),
            r.tied_ib.contains(&c.ib).to_string(),
        ]);
    }
    Report::new(manifest, &r, table)
}

pub fn area(manifest: RunManifest, hw: &HardwareConfig, args: &AreaArgs) -> Result<Report> {
    if args.sweep {
        let nets = load_networks(&args.network)?;
        let rows = waveguide_pfcu_sweep(hw, &args.pfcu_counts, args.budget_mm2, &nets).map_err(invalid)?;
        let mut table = Table::new(&["n_pfcu", "n_i", "pic_mm2", "ib", "geomean_fps_per_watt", "normalized"]);
        for r in &rows {
            table.push(vec![
                r.n_pfcu.to_string(),
                r.n_i.to_string(),
                num(r.pic_mm2),
                r.ib.to_string(),
                num(r.geomean_fps_per_watt),
                num(r.normalized),
            ]);
        }
        let best =
            rows.iter().max_by(|a, b| a.geomean_fps_per_watt.total_cmp(&b.geomean_fps_per_watt)).map(|r| r.n_pfcu);
        let body = json!({ "budget_mm2": args.budget_mm2, "rows": rows, "best_n_pfcu": best });
        return Report::new(manifest, body, table);
    }
    let a = area_breakdown(hw);
    let mut table = Table::new(&["part", "mm2", "share_of_pic"]);
    for (name, v) in [
        ("lens", a.lens_mm2),
        ("mrr", a.mrr_mm2),
        ("photodetector", a.photodetector_mm2),
        ("laser", a.laser_mm2),
        ("splitter", a.splitter_mm2),
        ("waveguide_routing", a.waveguide_routing_mm2),
    ] {
        table.push(vec![name.to_string(), num(v), num(v / a.pic_mm2)]);
    }
    table.push(vec!["pic".into(), num(a.pic_mm2), num(1.0)]);
    table.push(vec!["sram".into(), num(a.sram_mm2), String::new()]);
    table.push(vec!["cmos".into(), num(a.cmos_mm2), String::new()]);
    table.push(vec!["total".into(), num(a.total_mm2), String::new()]);
    Report::new(manifest, json!({ "config": hw.name, "area": a }), table)
}

pub fn power(manifest: RunManifest, hw: &HardwareConfig, args: &PowerArgs) -> Result<Report> {
    let hw = if args.baseline { baseline(hw) } else { hw.clone() };
    let scheme = if args.baseline { jtcsim::ParallelizationScheme::broadcast(1, 1) } else { scheme_for(&hw, args.ib)? };
    let taps = hw.n_w.min(9);
    let p = power_breakdown(&hw, &scheme, &Activity::peak(&hw, &scheme, taps));
    let (dacs, adcs) = converter_counts(&hw, &scheme);
    let mut table = Table::new(&["part", "watts", "share"]);
    for (name, w) in p.parts() {
        table.push(vec![name.to_string(), num(w), num(p.share(w))]);
    }
    table.push(vec!["total".into(), num(p.total), num(1.0)]);
    let body = json!({
        "config": hw,
        "scheme": scheme,
        "dac_count": dacs,
        "adc_count": adcs,
        "adc_mw_each": hw.adc_mw_each(),
        "dac_mw_each": hw.dac_mw_each(),
        "f_adc_hz": hw.f_adc_hz(),
        "power": p,
        "shares": power_shares(&p),
        "converter_share": p.share(p.adc + p.dac),
    });
    Report::new(manifest, body, table)
}
