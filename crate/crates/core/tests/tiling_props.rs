use jtcsim::tiling::{
    conv2d_reference, conv2d_via_1d, conv2d_with_plan, edge_effect_columns, leading_pad, partial_contributions,
    plan_tiling, Image2D, Kernel2D,
};
use jtcsim::{ConvMode, DirectCorrelator, JtcCorrelator, PaddingMode, TilingError, TilingVariant};
use num_rational::Rational64;
use proptest::prelude::*;

fn int_case() -> impl Strategy<Value = (Image2D<i64>, Kernel2D<i64>, usize)> {
    (4usize..=16, prop_oneof![Just(1usize), Just(3), Just(5)], 0usize..3).prop_flat_map(|(s_i, s_k, which)| {
        let s_i = s_i.max(s_k);
        let img = prop::collection::vec(-50i64..50, s_i * s_i);
        let ker = prop::collection::vec(-9i64..9, s_k * s_k);
        let w = s_i + s_k - 1;
        // row tiling, partial row tiling or partitioning
        let n_conv = match which {
            0 => (s_k * w + 1)..(w * (s_k + 4) + 1),
            1 => w..(s_k * w + 1),
            _ => (s_k.max(2))..w.max(s_k.max(2) + 1),
        };
        (img, ker, n_conv).prop_map(move |(i, k, n)| (Image2D::new(s_i, i).unwrap(), Kernel2D::new(s_k, k).unwrap(), n))
    })
}

proptest! {
    #[test]
    fn zero_padded_tiling_is_exact_over_integers((img, ker, n_conv) in int_case()) {
        let got = match conv2d_via_1d(&img, &ker, n_conv, &DirectCorrelator, PaddingMode::ZeroPadEdges) {
            Err(TilingError::Infeasible { .. }) => return Ok(()),
            r => r.unwrap(),
        };
        prop_assert_eq!(got, conv2d_reference(&img, &ker, ConvMode::Same).unwrap());
    }

    #[test]
    fn zero_padded_tiling_is_exact_over_rationals((img, ker, n_conv) in int_case()) {
        let img = img.map(|&v| Rational64::new(v, 7));
        let ker = ker.map(|&v| Rational64::new(v, 3));
        let got = match conv2d_via_1d(&img, &ker, n_conv, &DirectCorrelator, PaddingMode::ZeroPadEdges) {
            Err(TilingError::Infeasible { .. }) => return Ok(()),
            r => r.unwrap(),
        };
        prop_assert_eq!(got, conv2d_reference(&img, &ker, ConvMode::Same).unwrap());
    }

    #[test]
    fn unpadded_tiling_matches_valid_interior((img, ker, n_conv) in int_case()) {
        let got = match conv2d_via_1d(&img, &ker, n_conv, &DirectCorrelator, PaddingMode::None) {
            Err(TilingError::Infeasible { .. }) => return Ok(()),
            r => r.unwrap(),
        };
        let (s_i, s_k) = (img.size(), ker.size());
        let p = leading_pad(s_k);
        let valid = conv2d_reference(&img, &ker, ConvMode::Valid).unwrap();
        for r in 0..valid.size() {
            for c in 0..valid.size() {
                prop_assert_eq!(got.get(r + p, c + p), valid.get(r, c));
            }
        }
        let same = conv2d_reference(&img, &ker, ConvMode::Same).unwrap();
        let edges = edge_effect_columns(s_i, s_k);
        for r in 0..s_i {
            for c in 0..s_i {
                if got.get(r, c) != same.get(r, c) {
                    prop_assert!(edges.contains(&c), "mismatch at ({r},{c}) outside edge columns");
                }
            }
        }
    }

    #[test]
    fn every_output_row_emitted_once(s_i in 1usize..40, s_k in prop_oneof![Just(1usize), Just(3), Just(5), Just(7)],
                                     n_conv in 1usize..400, pad in any::<bool>()) {
        let padding = if pad { PaddingMode::ZeroPadEdges } else { PaddingMode::None };
        if let Ok(plan) = plan_tiling(s_i, s_k, n_conv, padding) {
            prop_assert_eq!(plan.emitted_rows(), s_i);
            prop_assert!(plan.steps >= 1);
        }
    }

    #[test]
    fn partials_sum_to_row_tiled_result((img, ker, n_conv) in int_case()) {
        let (s_i, s_k) = (img.size(), ker.size());
        let plan = match plan_tiling(s_i, s_k, n_conv, PaddingMode::ZeroPadEdges) {
            Ok(p) if p.variant != TilingVariant::RowTiling => p,
            _ => return Ok(()),
        };
        let mut acc = vec![0i64; s_i * s_i];
        for part in partial_contributions(&img, &ker, &plan, &DirectCorrelator).unwrap() {
            prop_assert_eq!(part.values.len(), s_i);
            for (c, v) in part.values.iter().enumerate() {
                acc[part.output_row * s_i + c] += v;
            }
        }
        let summed = Image2D::new(s_i, acc).unwrap();
        let w = s_i + s_k - 1;
        let whole = conv2d_via_1d(&img, &ker, s_k * w + 1, &DirectCorrelator, PaddingMode::ZeroPadEdges).unwrap();
        prop_assert_eq!(&summed, &whole);
        prop_assert_eq!(conv2d_with_plan(&img, &ker, &plan, &DirectCorrelator).unwrap(), whole);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn optical_backend_agrees_with_direct(s_i in 4usize..12, s_k in prop_oneof![Just(1usize), Just(3), Just(5)],
                                          seed in prop::collection::vec(0.0f64..1.0, 144 + 25)) {
        let s_i = s_i.max(s_k);
        let img = Image2D::from_fn(s_i, |r, c| seed[r * s_i + c]);
        let ker = Kernel2D::from_fn(s_k, |r, c| seed[144 + r * s_k + c]);
        let n_conv = (s_i + s_k - 1) * (s_k + 2);
        let optical = conv2d_via_1d(&img, &ker, n_conv, &JtcCorrelator, PaddingMode::ZeroPadEdges).unwrap();
        let direct = conv2d_via_1d(&img, &ker, n_conv, &DirectCorrelator, PaddingMode::ZeroPadEdges).unwrap();
        let scale = direct.data().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in optical.data().iter().zip(direct.data()) {
            prop_assert!((a - b).abs() <= 1e-6 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn infeasible_when_kernel_does_not_fit() {
    assert!(matches!(
        plan_tiling(8, 3, 2, PaddingMode::ZeroPadEdges),
        Err(TilingError::Infeasible { s_k: 3, n_conv: 2 })
    ));
}

#[test]
fn seam_mismatches_appear_without_padding() {
    let img = Image2D::from_fn(8, |r, c| (r * 8 + c + 1) as i64);
    let ker = Kernel2D::from_fn(3, |_, _| 1i64);
    let got = conv2d_via_1d(&img, &ker, 80, &DirectCorrelator, PaddingMode::None).unwrap();
    let same = conv2d_reference(&img, &ker, ConvMode::Same).unwrap();
    let mut cols: Vec<usize> = (0..8)
        .flat_map(|r| (0..8).map(move |c| (r, c)))
        .filter(|&(r, c)| got.get(r, c) != same.get(r, c))
        .map(|(_, c)| c)
        .collect();
    cols.sort();
    cols.dedup();
    assert_eq!(cols, vec![0, 7]);
}
