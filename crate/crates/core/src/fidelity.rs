//! Numerical fidelity of the analog datapath.
//!
//! Inputs and weights are uniformly quantized. Signed filters run as two
//! nonnegative filters whose results are subtracted digitally. Partial sums
//! of up to `depth` input channels accumulate as photodetector charge
//! before a single ADC readout; larger channel counts add ADC readouts
//! digitally.
//!
//! The ADC input range is fixed per layer and per stream: it is set to the
//! largest fully accumulated value seen on a noiseless calibration pass.
//! Shallow accumulation therefore reads small partial sums through a range
//! sized for the final sum and pays one quantization error per readout.
//!
//! Noise is additive white Gaussian, drawn once per channel-cycle with
//! variance `P / 10^(snr_db/10)`, where `P` is the mean squared
//! single-channel detector value. Accumulating `m` channels accumulates `m`
//! independent draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlate::DirectCorrelator;
use crate::scalar::{lit, Real};
use crate::tiling::{conv2d_reference, conv2d_via_1d, ConvMode, Image2D, Kernel2D, PaddingMode, TilingError};
use crate::workloads::{LayerPadding, LayerSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FidelityError {
    #[error("bit width {0} outside [2, 16]")]
    InvalidBits(u32),
    #[error("quantization scale must be positive and finite, got {0}")]
    DegenerateScale(f64),
    #[error("{len} partials exceed accumulation depth {depth}")]
    DepthExceeded { len: usize, depth: usize },
    #[error("accumulation depth must be at least 1")]
    InvalidDepth,
    #[error("snr_db must be positive, got {0}")]
    InvalidSnr(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input activation ({channel}, {row}, {col}) is negative")]
    NegativeInput { channel: usize, row: usize, col: usize },
    #[error(transparent)]
    Tiling(#[from] TilingError),
}

fn check_bits(bits: u32) -> Result<(), FidelityError> {
    if (2..=16).contains(&bits) {
        Ok(())
    } else {
        Err(FidelityError::InvalidBits(bits))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantConfig {
    pub act_bits: u32,
    pub weight_bits: u32,
    pub adc_bits: u32,
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self { act_bits: 8, weight_bits: 8, adc_bits: 8 }
    }
}

impl QuantConfig {
    pub fn uniform(bits: u32) -> Self {
        Self { act_bits: bits, weight_bits: bits, adc_bits: bits }
    }

    pub fn validate(&self) -> Result<(), FidelityError> {
        check_bits(self.act_bits)?;
        check_bits(self.weight_bits)?;
        check_bits(self.adc_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    /// Detector value is the channel's partial sum.
    #[default]
    Linear,
    /// Each channel's partial is squared before accumulation, separately
    /// in the positive and negative streams.
    Square,
    /// Streams accumulate linearly; the digital difference is squared.
    SquareDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AccumulationConfig {
    pub depth: usize,
    pub detection: Detection,
    /// `None` disables noise.
    pub snr_db: Option<f64>,
}

impl Default for AccumulationConfig {
    fn default() -> Self {
        Self { depth: 16, detection: Detection::Linear, snr_db: Some(20.0) }
    }
}

impl AccumulationConfig {
    pub fn noiseless(depth: usize) -> Self {
        Self { depth, detection: Detection::Linear, snr_db: None }
    }

    pub fn validate(&self) -> Result<(), FidelityError> {
        if self.depth == 0 {
            return Err(FidelityError::InvalidDepth);
        }
        match self.snr_db {
            Some(s) if !(s > 0.0) => Err(FidelityError::InvalidSnr(s)),
            _ => Ok(()),
        }
    }

    /// Per-channel noise standard deviation for a mean detector power.
    pub fn noise_sigma(&self, mean_power: f64) -> f64 {
        self.snr_db.map_or(0.0, |db| noise_sigma(mean_power, db))
    }
}

pub fn noise_sigma(mean_power: f64, snr_db: f64) -> f64 {
    (mean_power / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// `n` samples of zero-mean Gaussian noise.
pub fn gaussian_noise(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_noise(&mut rng, sigma, n)
}

fn draw_noise(rng: &mut impl Rng, sigma: f64, n: usize) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; n];
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and nonnegative");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Nonnegative filter pair with `p - n == original`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair<T> {
    pub p: Kernel2D<T>,
    pub n: Kernel2D<T>,
}

/// Minimal split: `p = max(k, 0)`, `n = max(-k, 0)`.
pub fn pseudo_negative_split<T: crate::Scalar>(ker: &Kernel2D<T>) -> FilterPair<T> {
    let zero = T::zero();
    FilterPair { p: ker.map(|&v| if v > zero { v } else { zero }), n: ker.map(|&v| if v < zero { -v } else { zero }) }
}

pub fn max_abs<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Symmetric uniform quantizer with `2^(bits-1) - 1` positive levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer<T> {
    levels: T,
    scale: T,
}

impl<T: Real> UniformQuantizer<T> {
    pub fn new(bits: u32, scale: T) -> Result<Self, FidelityError> {
        check_bits(bits)?;
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(FidelityError::DegenerateScale(scale.to_f64_lossy()));
        }
        Ok(Self { levels: lit((1u32 << (bits - 1)) as f64 - 1.0), scale })
    }

    pub fn quantize(&self, v: T) -> T {
        let q = (v / self.scale * self.levels).round().max(-self.levels).min(self.levels);
        q / self.levels * self.scale
    }
}

pub fn quantize_uniform<T: Real>(x: &[T], bits: u32, scale: T) -> Result<Vec<T>, FidelityError> {
    let q = UniformQuantizer::new(bits, scale)?;
    Ok(x.iter().map(|&v| q.quantize(v)).collect())
}

/// Unipolar ADC: clamps to `[0, full_scale]` and rounds to one of
/// `2^bits` evenly spaced levels, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adc<T> {
    step: T,
    full_scale: T,
}

impl<T: Real> Adc<T> {
    pub fn new(bits: u32, full_scale: T) -> Result<Self, FidelityError> {
        check_bits(bits)?;
        if !(full_scale > T::zero()) || !full_scale.is_finite() {
            return Err(FidelityError::DegenerateScale(full_scale.to_f64_lossy()));
        }
        let intervals = lit::<T>(((1u32 << bits) - 1) as f64);
        Ok(Self { step: full_scale / intervals, full_scale })
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn read(&self, v: T) -> T {
        let v = v.max(T::zero()).min(self.full_scale);
        ((v / self.step).round() * self.step).min(self.full_scale)
    }
}

pub fn adc_readout<T: Real>(v: T, bits: u32, full_scale: T) -> Result<T, FidelityError> {
    Ok(Adc::new(bits, full_scale)?.read(v))
}

fn detect<T: Real>(v: T, det: Detection) -> T {
    match det {
        Detection::Linear | Detection::SquareDifference => v,
        Detection::Square => v * v,
    }
}

/// Accumulates up to `cfg.depth` per-channel partials on one detector and
/// reads the result through `adc`. The noise power is referenced to the
/// mean squared detector value of these partials.
pub fn temporal_accumulate<T: Real>(
    partials: &[T],
    cfg: &AccumulationConfig,
    adc: &Adc<T>,
    seed: u64,
) -> Result<T, FidelityError> {
    cfg.validate()?;
    if partials.len() > cfg.depth {
        return Err(FidelityError::DepthExceeded { len: partials.len(), depth: cfg.depth });
    }
    if partials.is_empty() {
        return Ok(adc.read(T::zero()));
    }
    let detected: Vec<T> = partials.iter().map(|&v| detect(v, cfg.detection)).collect();
    let power = detected.iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>() / detected.len() as f64;
    let sigma = cfg.noise_sigma(power);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: f64 = draw_noise(&mut rng, sigma, detected.len()).iter().sum();
    let charge = detected.iter().copied().sum::<T>() + lit::<T>(noise);
    Ok(adc.read(charge))
}

/// Error of a simulated layer against two references.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    /// Against float inputs and weights.
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    /// `mean_abs_error / mean |reference|`.
    pub relative_error: f64,
    /// Against quantized inputs and weights accumulated at full precision,
    /// isolating the readout chain.
    pub mean_abs_error_vs_quantized: f64,
    pub outputs: usize,
}

/// Layer output and its error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerFidelity<T> {
    pub output: Vec<Image2D<T>>,
    pub reference: Vec<Image2D<T>>,
    pub stats: ErrorStats,
}

/// Simulates one layer through the tiled 1D datapath.
///
/// `weights[o][c]` is the kernel from input channel `c` to output channel
/// `o`; `inputs[c]` must be nonnegative. Convolutions run at unit stride
/// and are subsampled afterwards. `n_conv` is the 1D correlator size.
pub fn layer_fidelity_sim<T: Real>(
    layer: &LayerSpec,
    weights: &[Vec<Kernel2D<T>>],
    inputs: &[Image2D<T>],
    n_conv: usize,
    q: &QuantConfig,
    a: &AccumulationConfig,
    seed: u64,
) -> Result<LayerFidelity<T>, FidelityError> {
    q.validate()?;
    a.validate()?;
    check_shapes(layer, weights, inputs)?;

    let s_i = layer.in_size;
    let act_scale = inputs.iter().fold(T::zero(), |m, x| m.max(max_abs(x.data())));
    let w_scale = weights.iter().flatten().fold(T::zero(), |m, k| m.max(max_abs(k.data())));
    let xq: Vec<Image2D<T>> = match UniformQuantizer::new(q.act_bits, act_scale) {
        Ok(qz) => inputs.iter().map(|x| x.map(|&v| qz.quantize(v))).collect(),
        Err(FidelityError::DegenerateScale(_)) => inputs.to_vec(),
        Err(e) => return Err(e),
    };
    let wq: Vec<Vec<FilterPair<T>>> = match UniformQuantizer::new(q.weight_bits, w_scale) {
        Ok(qz) => weights
            .iter()
            .map(|row| row.iter().map(|k| pseudo_negative_split(&k.map(|&v| qz.quantize(v)))).collect())
            .collect(),
        Err(FidelityError::DegenerateScale(_)) => {
            weights.iter().map(|row| row.iter().map(pseudo_negative_split).collect()).collect()
        }
        Err(e) => return Err(e),
    };

    // detector values per (stream, output channel, input channel)
    let mut partials: [Vec<Vec<Image2D<T>>>; 2] = [Vec::new(), Vec::new()];
    for pairs in &wq {
        let mut p_row = Vec::with_capacity(pairs.len());
        let mut n_row = Vec::with_capacity(pairs.len());
        for (x, pair) in xq.iter().zip(pairs) {
            for (ker, row) in [(&pair.p, &mut p_row), (&pair.n, &mut n_row)] {
                let y = conv2d_via_1d(x, ker, n_conv, &DirectCorrelator, PaddingMode::ZeroPadEdges)?;
                row.push(y.map(|&v| detect(v, a.detection)));
            }
        }
        partials[0].push(p_row);
        partials[1].push(n_row);
    }

    let cells = s_i * s_i;
    let total =
        |stream: &[Vec<Image2D<T>>], o: usize, idx: usize| -> T { stream[o].iter().map(|img| img.data()[idx]).sum() };
    let mut adcs = Vec::with_capacity(2);
    let mut power = 0.0;
    let mut count = 0usize;
    for stream in &partials {
        let mut peak = T::zero();
        for o in 0..layer.out_channels {
            for idx in 0..cells {
                peak = peak.max(total(stream, o, idx));
            }
            for img in &stream[o] {
                power += img.data().iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>();
                count += cells;
            }
        }
        // an all-zero stream reads exactly zero; any positive range does
        let fs = if peak > T::zero() { peak } else { T::one() };
        adcs.push(Adc::new(q.adc_bits, fs)?);
    }
    let sigma = a.noise_sigma(if count > 0 { power / count as f64 } else { 0.0 });

    let mut output = Vec::with_capacity(layer.out_channels);
    let mut exact_q = Vec::with_capacity(layer.out_channels);
    for o in 0..layer.out_channels {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(o as u64);
        let mut digital = [vec![T::zero(); cells], vec![T::zero(); cells]];
        for (s, stream) in partials.iter().enumerate() {
            for group in stream[o].chunks(a.depth) {
                let noise = draw_noise(&mut rng, sigma * (group.len() as f64).sqrt(), cells);
                for (idx, acc) in digital[s].iter_mut().enumerate() {
                    let charge = group.iter().map(|img| img.data()[idx]).sum::<T>() + lit(noise[idx]);
                    *acc += adcs[s].read(charge);
                }
            }
        }
        let post = |v: T| if a.detection == Detection::SquareDifference { v * v } else { v };
        let sim = Image2D::from_fn(s_i, |r, c| post(digital[0][r * s_i + c] - digital[1][r * s_i + c]));
        let exact = Image2D::from_fn(s_i, |r, c| {
            post(total(&partials[0], o, r * s_i + c) - total(&partials[1], o, r * s_i + c))
        });
        output.push(finish(layer, &sim));
        exact_q.push(finish(layer, &exact));
    }

    let mut reference = Vec::with_capacity(layer.out_channels);
    for row in weights {
        let mut acc = Image2D::zeros(s_i);
        for (x, k) in inputs.iter().zip(row) {
            acc = acc.zip_with(&conv2d_reference(x, k, ConvMode::Same)?, |a, b| a + b);
        }
        reference.push(finish(layer, &acc));
    }

    let stats = error_stats(&output, &reference, &exact_q);
    Ok(LayerFidelity { output, reference, stats })
}

fn check_shapes<T: Real>(
    layer: &LayerSpec,
    weights: &[Vec<Kernel2D<T>>],
    inputs: &[Image2D<T>],
) -> Result<(), FidelityError> {
    layer.validate(0).map_err(|e| FidelityError::ShapeMismatch(e.to_string()))?;
    if inputs.len() != layer.in_channels {
        return Err(FidelityError::ShapeMismatch(format!(
            "{} input channels, layer expects {}",
            inputs.len(),
            layer.in_channels
        )));
    }
    if weights.len() != layer.out_channels {
        return Err(FidelityError::ShapeMismatch(format!(
            "{} filters, layer expects {}",
            weights.len(),
            layer.out_channels
        )));
    }
    for (c, x) in inputs.iter().enumerate() {
        if x.size() != layer.in_size {
            return Err(FidelityError::ShapeMismatch(format!(
                "input {c} is {0}x{0}, expected {1}",
                x.size(),
                layer.in_size
            )));
        }
        if let Some(i) = x.data().iter().position(|&v| v < T::zero()) {
            return Err(FidelityError::NegativeInput { channel: c, row: i / x.size(), col: i % x.size() });
        }
    }
    for (o, row) in weights.iter().enumerate() {
        if row.len() != layer.in_channels || row.iter().any(|k| k.size() != layer.kernel) {
            return Err(FidelityError::ShapeMismatch(format!(
                "filter {o} must have {} kernels of size {}",
                layer.in_channels, layer.kernel
            )));
        }
    }
    Ok(())
}

/// Crops a `same` result to the layer's padding and applies the stride.
fn finish<T: Real>(layer: &LayerSpec, same: &Image2D<T>) -> Image2D<T> {
    let (offset, size) = match layer.padding {
        LayerPadding::Same => (0, same.size()),
        LayerPadding::Valid => (layer.kernel / 2, same.size() - layer.kernel + 1),
    };
    let out = layer.out_size();
    debug_assert_eq!(out, size.div_ceil(layer.stride));
    Image2D::from_fn(out, |r, c| same.get(offset + r * layer.stride, offset + c * layer.stride))
}

fn error_stats<T: Real>(sim: &[Image2D<T>], reference: &[Image2D<T>], exact_q: &[Image2D<T>]) -> ErrorStats {
    let (mut abs, mut max, mut mag, mut abs_q, mut n) = (0.0, 0.0f64, 0.0, 0.0, 0usize);
    for ((s, r), e) in sim.iter().zip(reference).zip(exact_q) {
        for ((&s, &r), &e) in s.data().iter().zip(r.data()).zip(e.data()) {
            let err = (s - r).to_f64_lossy().abs();
            abs += err;
            max = max.max(err);
            mag += r.to_f64_lossy().abs();
            abs_q += (s - e).to_f64_lossy().abs();
            n += 1;
        }
    }
    let nf = n.max(1) as f64;
    ErrorStats {
        mean_abs_error: abs / nf,
        max_abs_error: max,
        relative_error: if mag > 0.0 { abs / mag } else { 0.0 },
        mean_abs_error_vs_quantized: abs_q / nf,
        outputs: n,
    }
}

/// Random nonnegative inputs and signed weights for a layer.
pub fn random_layer_operands(layer: &LayerSpec, seed: u64) -> (Vec<Vec<Kernel2D<f64>>>, Vec<Image2D<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = (0..layer.in_channels).map(|_| Image2D::from_fn(layer.in_size, |_, _| rng.random::<f64>())).collect();
    let weights = (0..layer.out_channels)
        .map(|_| {
            (0..layer.in_channels)
                .map(|_| Kernel2D::from_fn(layer.kernel, |_, _| rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    (weights, inputs)
}
