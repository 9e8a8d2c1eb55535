use jtcsim::optics::{
    compose_joint_input, extract_correlation_term, fourier_lens, jtc_correlate, separation_check, Signal1D,
};
use jtcsim::{cross_correlate_full, JtcConfig, OpticsError};
use num_complex::Complex64;
use proptest::prelude::*;

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|f| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (f * t) as f64 / n as f64))
                .sum::<Complex64>()
                * s
        })
        .collect()
}

fn signals() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(0.0f64..1.0, 1..48), prop::collection::vec(0.0f64..1.0, 1..16))
}

proptest! {
    #[test]
    fn forward_term_is_direct_correlation((s, k) in signals()) {
        let cfg = JtcConfig::auto(s.len(), k.len());
        let out = jtc_correlate(&Signal1D::new(s.clone()).unwrap(), &Signal1D::new(k.clone()).unwrap(), &cfg).unwrap();
        let got = extract_correlation_term(&out, s.len(), k.len()).unwrap();
        let want = cross_correlate_full(&s, &k);
        let scale = want.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
        for (a, b) in got.samples().iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
        }
        prop_assert!(out.imag_residue < 1e-9);
        prop_assert!(out.terms_disjoint());
    }

    #[test]
    fn mirror_term_is_reversed_forward_term((s, k) in signals()) {
        let cfg = JtcConfig::auto(s.len(), k.len());
        let out = jtc_correlate(&Signal1D::new(s).unwrap(), &Signal1D::new(k).unwrap(), &cfg).unwrap();
        let fw: Vec<f64> = out.plane[out.forward_window()].to_vec();
        let mut mw: Vec<f64> = out.plane[out.mirror_window()].to_vec();
        mw.reverse();
        for (a, b) in fw.iter().zip(&mw) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn lens_matches_naive_dft_and_conserves_energy(x in prop::collection::vec(-1.0f64..1.0, 1..64)) {
        let sig = Signal1D::new(x.clone()).unwrap();
        let fast = fourier_lens(&sig);
        let slow = naive_dft(&x.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        for (a, b) in fast.samples().iter().zip(&slow) {
            prop_assert!((a - b).norm() < 1e-9);
        }
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        let e_out: f64 = fast.samples().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((e_in - e_out).abs() <= 1e-9 * (1.0 + e_in));
    }

    #[test]
    fn correlation_is_bilinear((s, k) in signals(), a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let cfg = JtcConfig::auto(s.len(), k.len());
        let base = jtc_correlate(&Signal1D::new(s.clone()).unwrap(), &Signal1D::new(k.clone()).unwrap(), &cfg).unwrap();
        let s2: Vec<f64> = s.iter().map(|v| v * a).collect();
        let k2: Vec<f64> = k.iter().map(|v| v * b).collect();
        let scaled = jtc_correlate(&Signal1D::new(s2).unwrap(), &Signal1D::new(k2).unwrap(), &cfg).unwrap();
        let x = extract_correlation_term(&base, s.len(), k.len()).unwrap();
        let y = extract_correlation_term(&scaled, s.len(), k.len()).unwrap();
        let scale = x.samples().iter().fold(1.0f64, |m, v| m.max(v.abs())) * a * b;
        for (u, v) in x.samples().iter().zip(y.samples()) {
            prop_assert!((u * a * b - v).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn separated_geometries_have_disjoint_terms(ls in 1usize..20, lk in 1usize..20, os in 0usize..10,
                                                ok in 0usize..10, extra in 0usize..20) {
        let d_min = jtcsim::optics::minimum_separation(ls, lk);
        let probe = JtcConfig::new(usize::MAX / 4, os, ok);
        let d = probe.separation(ls, lk);
        if d < d_min {
            return Ok(());
        }
        let used = os + ls + lk + ok;
        let n = (used..used + 4 * (ls + lk) + 64 + extra)
            .find(|&n| separation_check(ls, lk, d, n))
            .unwrap() + extra;
        prop_assert!(separation_check(ls, lk, d, n));
        let cfg = JtcConfig::new(n, os, ok);
        let s = Signal1D::new(vec![1.0f64; ls]).unwrap();
        let k = Signal1D::new(vec![1.0; lk]).unwrap();
        let out = jtc_correlate(&s, &k, &cfg).unwrap();
        prop_assert!(out.terms_disjoint());
        let want = cross_correlate_full(s.samples(), k.samples());
        let got = extract_correlation_term(&out, ls, lk).unwrap();
        for (a, b) in got.samples().iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b));
        }
    }
}

#[test]
fn two_impulses_give_three_spots() {
    let s = Signal1D::new(vec![1.0f64]).unwrap();
    let k = Signal1D::new(vec![1.0f64]).unwrap();
    let cfg = JtcConfig::new(16, 2, 3);
    let out = jtc_correlate(&s, &k, &cfg).unwrap();
    let nz: Vec<usize> = (0..16).filter(|&i| out.plane[i].abs() > 1e-9).collect();
    let d = out.separation();
    assert_eq!(nz, vec![0, d, 16 - d]);
    assert!((out.plane[0] - 2.0).abs() < 1e-12);
    assert!((out.plane[d] - 1.0).abs() < 1e-12);
}

#[test]
fn overlapping_geometry_is_rejected() {
    let s = Signal1D::new(vec![1.0f64; 8]).unwrap();
    let k = Signal1D::new(vec![1.0; 3]).unwrap();
    let err = jtc_correlate(&s, &k, &JtcConfig::new(16, 0, 0)).unwrap_err();
    assert!(matches!(err, OpticsError::SeparationViolation(_)));
}

#[test]
fn joint_input_places_operands_at_the_edges() {
    let s = Signal1D::new(vec![1.0f64, 2.0]).unwrap();
    let k = Signal1D::new(vec![3.0]).unwrap();
    let j = compose_joint_input(&s, &k, &JtcConfig::new(8, 1, 2)).unwrap();
    assert_eq!(j.samples(), &[0.0, 1.0, 2.0, 0.0, 0.0, 3.0, 0.0, 0.0]);
}

#[test]
fn negative_inputs_are_rejected() {
    let s = Signal1D::new(vec![1.0f64, -2.0]).unwrap();
    let k = Signal1D::new(vec![1.0f64]).unwrap();
    assert!(matches!(jtc_correlate(&s, &k, &JtcConfig::auto(2, 1)), Err(OpticsError::NegativeSample(1))));
}
