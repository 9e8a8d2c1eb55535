//! 1D cross-correlation backends.
//!
//! Every backend returns the full correlation of length
//! `input.len() + kernel.len() - 1`, where sample `t` corresponds to lag
//! `t - (kernel.len() - 1)` and holds `sum_j kernel[j] * input[lag + j]`.
//! This is the CNN convention; no kernel flip.

use crate::optics::OpticsError;
use crate::scalar::Scalar;

/// A device or routine that computes a full 1D cross-correlation.
pub trait Correlator1D<T: Scalar> {
    fn correlate(&self, input: &[T], kernel: &[T]) -> Result<Vec<T>, OpticsError>;
}

/// Sliding dot product in the sample type's own arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectCorrelator;

impl<T: Scalar> Correlator1D<T> for DirectCorrelator {
    fn correlate(&self, input: &[T], kernel: &[T]) -> Result<Vec<T>, OpticsError> {
        if input.is_empty() || kernel.is_empty() {
            return Err(OpticsError::EmptySignal);
        }
        Ok(cross_correlate_full(input, kernel))
    }
}

/// Full cross-correlation by direct summation. Zero kernel taps are
/// skipped, which matters for tiled kernels that are mostly padding.
pub fn cross_correlate_full<T: Scalar>(input: &[T], kernel: &[T]) -> Vec<T> {
    if input.is_empty() || kernel.is_empty() {
        return Vec::new();
    }
    let n = input.len();
    let m = kernel.len();
    let mut out = vec![T::zero(); n + m - 1];
    // out[t] = sum_j k[j] * x[t - (m - 1) + j]; index of x is i = t - (m - 1) + j
    for (j, &kj) in kernel.iter().enumerate() {
        if kj == T::zero() {
            continue;
        }
        let shift = m - 1 - j;
        for (i, &xi) in input.iter().enumerate() {
            out[i + shift] += kj * xi;
        }
    }
    out
}
