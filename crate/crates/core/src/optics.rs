//! Discrete scalar model of a 1D on-chip joint transform correlator.
//!
//! The joint input plane carries the signal at its left end and the kernel
//! at its right end. A first lens takes the Fourier transform, the
//! Fourier-plane detectors apply `|.|^2`, and a second lens transforms the
//! intensity back. By Wiener-Khinchin the output plane is the circular
//! autocorrelation of the joint input: the signal and kernel
//! autocorrelations sit at lag 0 and the cross-correlation of signal and
//! kernel appears twice, once forward around `+d` and once reversed around
//! `-d`.
//!
//! Both lenses are unitary DFTs, so the raw output plane equals the
//! autocorrelation divided by `sqrt(N)`. [`jtc_correlate`] undoes that
//! factor so the plane can be compared against a sliding dot product.

use std::ops::Range;

use num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::scalar::{lit, Real, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpticsError {
    #[error("signal must contain at least one sample")]
    EmptySignal,
    #[error("signal contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("signal contains a negative sample at index {0}; optical amplitudes must be nonnegative")]
    NegativeSample(usize),
    #[error("separation violated: {0}")]
    SeparationViolation(String),
    #[error("correlation window [{start}, {end}) does not fit a plane of {plane}")]
    WindowOutOfBounds { start: usize, end: usize, plane: usize },
}

/// Real-valued 1D sample vector. Never empty, never NaN/Inf.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D<T> {
    samples: Vec<T>,
}

impl<T: Scalar> Signal1D<T> {
    pub fn new(samples: Vec<T>) -> Result<Self, OpticsError> {
        if samples.is_empty() {
            return Err(OpticsError::EmptySignal);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite_value()) {
            return Err(OpticsError::NonFinite(i));
        }
        Ok(Self { samples })
    }

    /// Like [`Signal1D::new`] but also rejects negative samples.
    pub fn nonnegative(samples: Vec<T>) -> Result<Self, OpticsError> {
        let s = Self::new(samples)?;
        s.check_nonnegative()?;
        Ok(s)
    }

    fn check_nonnegative(&self) -> Result<(), OpticsError> {
        match self.samples.iter().position(|v| *v < T::zero()) {
            Some(i) => Err(OpticsError::NegativeSample(i)),
            None => Ok(()),
        }
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.samples.len()
    }
}

/// Complex amplitudes at a Fourier plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D<T> {
    samples: Vec<Complex<T>>,
}

impl<T: Real> ComplexField1D<T> {
    pub fn new(samples: Vec<Complex<T>>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Anything a lens can be placed behind.
pub trait LensInput<T: Real> {
    fn to_field(&self) -> Vec<Complex<T>>;
}

impl<T: Real> LensInput<T> for Signal1D<T> {
    fn to_field(&self) -> Vec<Complex<T>> {
        self.samples.iter().map(|&v| Complex::new(v, T::zero())).collect()
    }
}

impl<T: Real> LensInput<T> for ComplexField1D<T> {
    fn to_field(&self) -> Vec<Complex<T>> {
        self.samples.clone()
    }
}

/// How the output-plane detectors record the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Readout {
    /// The plane value itself.
    #[default]
    Linear,
    /// Intensity of the plane value, for sensitivity studies.
    Square,
}

/// Geometry of the joint input plane.
///
/// The signal starts `offset_s` samples from the left edge and the kernel
/// ends `offset_k` samples from the right edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JtcConfig {
    pub plane_size: usize,
    pub offset_s: usize,
    pub offset_k: usize,
    pub readout: Readout,
}

impl JtcConfig {
    pub fn new(plane_size: usize, offset_s: usize, offset_k: usize) -> Self {
        Self { plane_size, offset_s, offset_k, readout: Readout::Linear }
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    /// Smallest separating geometry for the given lengths, with the plane
    /// rounded up to a power of two.
    pub fn auto(s_len: usize, k_len: usize) -> Self {
        let widest = s_len.max(k_len).max(1);
        let d = minimum_separation(s_len, k_len);
        let n = minimum_plane(s_len, k_len, d).next_power_of_two();
        Self::new(n, 0, widest - 1)
    }

    /// First plane index of the forward cross-correlation window.
    pub fn correlation_start(&self) -> usize {
        self.offset_s + self.offset_k + 1
    }

    /// Center lag `d` of the forward cross-correlation term for the given
    /// input lengths.
    pub fn separation(&self, s_len: usize, k_len: usize) -> usize {
        self.correlation_start() + (s_len + k_len).saturating_sub(2) / 2
    }

    /// Checks placement and the separation predicate for the given lengths.
    pub fn validate(&self, s_len: usize, k_len: usize) -> Result<(), OpticsError> {
        self.check_placement(s_len, k_len)?;
        let d = self.separation(s_len, k_len);
        if !separation_check(s_len, k_len, d, self.plane_size) {
            return Err(OpticsError::SeparationViolation(format!(
                "lengths ({s_len}, {k_len}) with d = {d} need d >= {} and a plane of at least {}, got {}",
                minimum_separation(s_len, k_len),
                minimum_plane(s_len, k_len, d.max(minimum_separation(s_len, k_len))),
                self.plane_size
            )));
        }
        Ok(())
    }

    fn check_placement(&self, s_len: usize, k_len: usize) -> Result<(), OpticsError> {
        let used = self.offset_s + s_len + k_len + self.offset_k;
        if used > self.plane_size {
            return Err(OpticsError::SeparationViolation(format!(
                "signal ({s_len}) and kernel ({k_len}) with offsets ({}, {}) need {used} positions, plane has {}",
                self.offset_s, self.offset_k, self.plane_size
            )));
        }
        Ok(())
    }
}

/// Smallest center lag that keeps the cross term clear of the lag-0 term.
pub fn minimum_separation(s_len: usize, k_len: usize) -> usize {
    let w = (s_len + k_len).saturating_sub(1);
    w.saturating_sub(1) / 2 + s_len.max(k_len)
}

fn minimum_plane(s_len: usize, k_len: usize, d: usize) -> usize {
    let w = (s_len + k_len).saturating_sub(1);
    let half = w.saturating_sub(1) / 2;
    2 * d + 2 * (w - 1 - half) + 1
}

/// True iff a cross-correlation term of width `s_len + k_len - 1` centered
/// at lag `d` is disjoint from the lag-0 autocorrelation term and from its
/// mirror image at `-d` on a circular plane of `n` samples.
///
/// For equal lengths this is `d >= s_len + k_len - 1` and
/// `n >= 2d + s_len + k_len - 1`.
pub fn separation_check(s_len: usize, k_len: usize, d: usize, n: usize) -> bool {
    if s_len == 0 || k_len == 0 || d == 0 || n == 0 {
        return false;
    }
    d >= minimum_separation(s_len, k_len) && n >= minimum_plane(s_len, k_len, d)
}

/// Places `s` and `k` at opposite ends of a zeroed plane.
pub fn compose_joint_input<T: Scalar>(
    s: &Signal1D<T>,
    k: &Signal1D<T>,
    cfg: &JtcConfig,
) -> Result<Signal1D<T>, OpticsError> {
    cfg.check_placement(s.len(), k.len())?;
    let mut plane = vec![T::zero(); cfg.plane_size];
    plane[cfg.offset_s..cfg.offset_s + s.len()].copy_from_slice(s.samples());
    let k_start = cfg.plane_size - cfg.offset_k - k.len();
    plane[k_start..k_start + k.len()].copy_from_slice(k.samples());
    Ok(Signal1D { samples: plane })
}

/// Unitary forward DFT, `X[f] = N^{-1/2} sum_n x[n] e^{-2 pi i f n / N}`.
pub fn fourier_lens<T: Real>(field: &impl LensInput<T>) -> ComplexField1D<T> {
    let mut buf = field.to_field();
    let n = buf.len();
    if n == 0 {
        return ComplexField1D::new(buf);
    }
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);
    fft.process(&mut buf);
    let scale = T::one() / lit::<T>(n as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    ComplexField1D::new(buf)
}

/// Square-law detection, `|F|^2` element-wise.
pub fn square_detect<T: Real>(field: &ComplexField1D<T>) -> Signal1D<T> {
    Signal1D { samples: field.samples.iter().map(|c| c.norm_sqr()).collect() }
}

/// Output plane of a JTC run plus the term geometry needed to read it.
#[derive(Debug, Clone, PartialEq)]
pub struct JtcOutput<T> {
    pub plane: Vec<T>,
    /// Centers `[-d, 0, +d]` of the three terms; negative values wrap.
    pub term_centers: [isize; 3],
    /// Plane index of the first sample of the forward correlation window.
    pub correlation_start: usize,
    pub s_len: usize,
    pub k_len: usize,
    /// Largest imaginary part left after the second lens, relative to the
    /// largest magnitude on the plane.
    pub imag_residue: T,
    pub readout: Readout,
}

impl<T: Real> JtcOutput<T> {
    pub fn plane_size(&self) -> usize {
        self.plane.len()
    }

    pub fn separation(&self) -> usize {
        self.term_centers[2] as usize
    }

    /// Index range of the forward cross-correlation term.
    pub fn forward_window(&self) -> Range<usize> {
        let w = self.s_len + self.k_len - 1;
        self.correlation_start..self.correlation_start + w
    }

    /// Index range of the reversed cross-correlation term.
    pub fn mirror_window(&self) -> Range<usize> {
        let n = self.plane.len();
        let w = self.s_len + self.k_len - 1;
        let last = n - self.correlation_start;
        last + 1 - w..last + 1
    }

    /// Indices occupied by the lag-0 autocorrelation term.
    pub fn center_support(&self) -> Vec<usize> {
        let n = self.plane.len();
        let reach = self.s_len.max(self.k_len) - 1;
        let mut idx: Vec<usize> = (0..=reach.min(n - 1)).collect();
        idx.extend((1..=reach).map(|m| n - m).filter(|&i| i > reach));
        idx
    }

    /// True when the three term supports share no plane index.
    pub fn terms_disjoint(&self) -> bool {
        let n = self.plane.len();
        let mut owner = vec![0u8; n];
        let fw = self.forward_window();
        if fw.end > n {
            return false;
        }
        let mw = self.mirror_window();
        for i in self.center_support().into_iter().chain(fw).chain(mw) {
            owner[i] += 1;
            if owner[i] > 1 {
                return false;
            }
        }
        true
    }
}

/// Full JTC pipeline: compose, lens, square-law detect, lens.
///
/// The returned plane is rescaled by `sqrt(N)` so that it equals the
/// circular autocorrelation of the joint input (or its square with
/// [`Readout::Square`]).
pub fn jtc_correlate<T: Real>(s: &Signal1D<T>, k: &Signal1D<T>, cfg: &JtcConfig) -> Result<JtcOutput<T>, OpticsError> {
    s.check_nonnegative()?;
    k.check_nonnegative()?;
    cfg.validate(s.len(), k.len())?;

    let joint = compose_joint_input(s, k, cfg)?;
    let fourier = fourier_lens(&joint);
    let intensity = square_detect(&fourier);
    let out = fourier_lens(&intensity);

    let rescale = lit::<T>(cfg.plane_size as f64).sqrt();
    let mut max_mag = T::zero();
    let mut max_imag = T::zero();
    let mut plane = Vec::with_capacity(cfg.plane_size);
    for c in out.samples() {
        max_mag = max_mag.max(c.norm());
        max_imag = max_imag.max(c.im.abs());
        let v = c.re * rescale;
        plane.push(match cfg.readout {
            Readout::Linear => v,
            Readout::Square => v * v,
        });
    }
    let imag_residue = if max_mag > T::zero() { max_imag / max_mag } else { T::zero() };

    let d = cfg.separation(s.len(), k.len()) as isize;
    Ok(JtcOutput {
        plane,
        term_centers: [-d, 0, d],
        correlation_start: cfg.correlation_start(),
        s_len: s.len(),
        k_len: k.len(),
        imag_residue,
        readout: cfg.readout,
    })
}

/// Reads the forward cross-correlation window, `s_len + k_len - 1` samples.
///
/// Sample `t` holds `sum_j k[j] * s[t - (k_len - 1) + j]`.
pub fn extract_correlation_term<T: Real>(
    out: &JtcOutput<T>,
    s_len: usize,
    k_len: usize,
) -> Result<Signal1D<T>, OpticsError> {
    if s_len == 0 || k_len == 0 {
        return Err(OpticsError::EmptySignal);
    }
    let start = out.correlation_start;
    let end = start + s_len + k_len - 1;
    if end > out.plane.len() {
        return Err(OpticsError::WindowOutOfBounds { start, end, plane: out.plane.len() });
    }
    Ok(Signal1D { samples: out.plane[start..end].to_vec() })
}

/// 1D correlator backed by the simulated JTC, with an automatically sized
/// plane per call.
#[derive(Debug, Clone, Copy, Default)]
pub struct JtcCorrelator;

impl<T: Real> crate::correlate::Correlator1D<T> for JtcCorrelator {
    fn correlate(&self, input: &[T], kernel: &[T]) -> Result<Vec<T>, OpticsError> {
        let s = Signal1D::nonnegative(input.to_vec())?;
        let k = Signal1D::nonnegative(kernel.to_vec())?;
        let cfg = JtcConfig::auto(s.len(), k.len());
        let out = jtc_correlate(&s, &k, &cfg)?;
        Ok(extract_correlation_term(&out, s.len(), k.len())?.into_samples())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlate::cross_correlate_full;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig(v: &[f64]) -> Signal1D<f64> {
        Signal1D::new(v.to_vec()).unwrap()
    }

    /// O(N^2) unitary DFT, independent of the FFT path.
    fn naive_dft(x: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let n = x.len();
        let norm = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|f| {
                x.iter()
                    .enumerate()
                    .map(|(t, &v)| {
                        let ang = -2.0 * std::f64::consts::PI * (f * t) as f64 / n as f64;
                        v * Complex::new(ang.cos(), ang.sin())
                    })
                    .sum::<Complex<f64>>()
                    * norm
            })
            .collect()
    }

    #[test]
    fn compose_places_impulses_at_plane_ends() {
        let j = compose_joint_input(&sig(&[1.0]), &sig(&[1.0]), &JtcConfig::new(8, 0, 0)).unwrap();
        assert_eq!(j.samples(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn compose_respects_offsets() {
        let j = compose_joint_input(&sig(&[1.0, 2.0]), &sig(&[3.0]), &JtcConfig::new(8, 1, 1)).unwrap();
        assert_eq!(j.samples(), &[0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 3.0, 0.0]);
    }

    #[test]
    fn compose_rejects_overlapping_supports() {
        let s = sig(&[1.0; 5]);
        let err = compose_joint_input(&s, &s, &JtcConfig::new(8, 0, 0)).unwrap_err();
        assert!(matches!(err, OpticsError::SeparationViolation(_)));
    }

    #[test]
    fn lens_of_impulse_is_flat() {
        let f = fourier_lens(&sig(&[1.0, 0.0, 0.0, 0.0]));
        for c in f.samples() {
            assert!((c.re - 0.5).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
        let z = fourier_lens(&sig(&[0.0; 6]));
        assert!(z.samples().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn lens_matches_naive_dft_and_preserves_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 7, 16, 45, 128] {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = fourier_lens(&sig(&x));
            let xc: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
            let slow = naive_dft(&xc);
            for (a, b) in fast.samples().iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10, "n={n}");
            }
            let e_in: f64 = x.iter().map(|v| v * v).sum();
            let e_out: f64 = fast.samples().iter().map(|c| c.norm_sqr()).sum();
            assert!((e_in - e_out).abs() <= 1e-12 * e_in.max(1e-300), "n={n}");
        }
    }

    #[test]
    fn square_detect_is_norm_squared() {
        let f = ComplexField1D::new(vec![Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)]);
        assert_eq!(square_detect(&f).samples(), &[1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<Complex<f64>> =
            (0..32).map(|_| Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let d = square_detect(&ComplexField1D::new(v.clone()));
        for (c, p) in v.iter().zip(d.samples()) {
            assert_eq!(*p, c.re * c.re + c.im * c.im);
        }
    }

    #[test]
    fn two_impulses_give_three_terms() {
        let out = jtc_correlate(&sig(&[1.0]), &sig(&[1.0]), &JtcConfig::new(8, 0, 0)).unwrap();
        let expect = [2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        for (a, b) in out.plane.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        // d = 1, and -d wraps to 7
        assert_eq!(out.term_centers, [-1, 0, 1]);
        let term = extract_correlation_term(&out, 1, 1).unwrap();
        assert!((term.samples()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn impulse_kernel_extracts_shifted_signal() {
        let s = sig(&[1.0, 2.0, 3.0]);
        let k = sig(&[1.0, 0.0, 0.0]);
        let out = jtc_correlate(&s, &k, &JtcConfig::auto(3, 3)).unwrap();
        let term = extract_correlation_term(&out, 3, 3).unwrap();
        let expect = [0.0, 0.0, 1.0, 2.0, 3.0];
        for (a, b) in term.samples().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_pair_matches_sliding_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..1.0)).collect();
        let k: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
        let cfg = JtcConfig::new(64, 0, 11);
        let out = jtc_correlate(&sig(&s), &sig(&k), &cfg).unwrap();
        assert!(out.terms_disjoint());
        let term = extract_correlation_term(&out, 12, 3).unwrap();
        let oracle = cross_correlate_full(&s, &k);
        let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in term.samples().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn separation_predicate_examples() {
        assert!(separation_check(3, 3, 5, 16));
        assert!(!separation_check(3, 3, 4, 16));
        assert!(separation_check(256, 256, 511, 1533));
        assert!(!separation_check(256, 256, 511, 1532));
        // unequal lengths need more room than s_len + k_len - 1
        assert!(!separation_check(12, 3, 14, 64));
        assert!(separation_check(12, 3, 18, 64));
    }

    #[test]
    fn auto_config_is_smallest_power_of_two() {
        let cfg = JtcConfig::auto(256, 256);
        assert_eq!(cfg.plane_size, 2048);
        assert_eq!(cfg.separation(256, 256), 511);
        assert!(cfg.validate(256, 256).is_ok());
        let tight = JtcConfig::new(1533, 0, 255);
        assert!(tight.validate(256, 256).is_ok());
        assert!(JtcConfig::new(1532, 0, 255).validate(256, 256).is_err());
    }

    #[test]
    fn negative_inputs_are_rejected() {
        let err = jtc_correlate(&sig(&[1.0, -1.0]), &sig(&[1.0]), &JtcConfig::auto(2, 1)).unwrap_err();
        assert_eq!(err, OpticsError::NegativeSample(1));
    }

    #[test]
    fn square_readout_squares_the_plane() {
        let s = sig(&[0.5, 2.0]);
        let k = sig(&[3.0]);
        let cfg = JtcConfig::auto(2, 1);
        let lin = jtc_correlate(&s, &k, &cfg).unwrap();
        let sq = jtc_correlate(&s, &k, &cfg.with_readout(Readout::Square)).unwrap();
        for (a, b) in lin.plane.iter().zip(&sq.plane) {
            assert!((a * a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn window_out_of_bounds() {
        let out = jtc_correlate(&sig(&[1.0]), &sig(&[1.0]), &JtcConfig::new(8, 0, 0)).unwrap();
        assert!(matches!(extract_correlation_term(&out, 5, 4), Err(OpticsError::WindowOutOfBounds { .. })));
    }

    #[test]
    fn signal_validation() {
        assert_eq!(Signal1D::<f64>::new(vec![]).unwrap_err(), OpticsError::EmptySignal);
        assert_eq!(Signal1D::new(vec![1.0, f64::NAN]).unwrap_err(), OpticsError::NonFinite(1));
    }
}
