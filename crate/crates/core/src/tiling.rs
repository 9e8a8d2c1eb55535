//! 2D convolution computed with a 1D correlator.
//!
//! Rows of the input image are concatenated into one 1D signal and the
//! kernel rows are concatenated with `W - S_k` zeros between them, where
//! `W` is the (possibly padded) row width. One 1D correlation then yields
//! several rows of the 2D result at once. Three variants cover the range of
//! maximum 1D sizes `n_conv`:
//!
//! | variant            | condition                  | 1D correlations           |
//! |--------------------|----------------------------|---------------------------|
//! | `RowTiling`        | `n_conv > S_k * W`         | `ceil(S_i / N_or)`        |
//! | `PartialRowTiling` | `W <= n_conv <= S_k * W`   | `S_i * ceil(S_k / N_ir)`  |
//! | `RowPartitioning`  | `n_conv < W`               | `S_i * S_k * ceil(W / n_conv)` |
//!
//! with `N_ir = floor(n_conv / W)` and `N_or = N_ir - S_k + 1`.
//!
//! Output is always `same`-sized. Missing rows above and below the image
//! are zero rows; `p = floor(S_k / 2)` rows go on top. Without padding a
//! kernel row that hangs off the left or right of an image row reads the
//! neighbouring tiled row (the edge effect). [`PaddingMode::ZeroPadEdges`]
//! inserts `p` zeros before and `S_k - 1 - p` zeros after every row, which
//! makes the result identical to [`conv2d_reference`].

use thiserror::Error;

use crate::correlate::Correlator1D;
use crate::optics::{OpticsError, Signal1D};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TilingError {
    #[error("image must be square and non-empty: got {rows} rows of widths {cols:?}")]
    NotSquare { rows: usize, cols: Vec<usize> },
    #[error("element count {got} does not match a {size}x{size} matrix")]
    BadDataLength { size: usize, got: usize },
    #[error("matrix contains a non-finite value at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("kernel of size {s_k} is larger than the {s_i}x{s_i} image")]
    KernelTooLarge { s_i: usize, s_k: usize },
    #[error("infeasible: a kernel row of {s_k} taps cannot fit a 1D size of {n_conv}")]
    Infeasible { s_k: usize, n_conv: usize },
    #[error("step {step} out of range for a plan with {steps} steps")]
    StepOutOfRange { step: usize, steps: usize },
    #[error("correlation output has {got} samples, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("plan was built for ({plan_s_i}, {plan_s_k}), operands are ({s_i}, {s_k})")]
    PlanMismatch { plan_s_i: usize, plan_s_k: usize, s_i: usize, s_k: usize },
    #[error(transparent)]
    Backend(#[from] OpticsError),
}

/// Square row-major matrix. Used for both images and kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    size: usize,
    data: Vec<T>,
}

/// `S_i x S_i` input plane.
pub type Image2D<T> = Matrix<T>;
/// `S_k x S_k` filter.
pub type Kernel2D<T> = Matrix<T>;

impl<T: Scalar> Matrix<T> {
    pub fn new(size: usize, data: Vec<T>) -> Result<Self, TilingError> {
        if size == 0 || data.len() != size * size {
            return Err(TilingError::BadDataLength { size, got: data.len() });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite_value()) {
            return Err(TilingError::NonFinite(i / size, i % size));
        }
        Ok(Self { size, data })
    }

    /// Builds from nested rows; rejects ragged or rectangular input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, TilingError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(TilingError::NotSquare { rows: n, cols: rows.iter().map(Vec::len).collect() });
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    pub fn zeros(size: usize) -> Self {
        Self { size, data: vec![T::zero(); size * size] }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let data = (0..size * size).map(|i| f(i / size, i % size)).collect();
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.size + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.size..(r + 1) * self.size]
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { size: self.size, data: self.data.iter().map(f).collect() }
    }

    /// Element-wise combination of two equally sized matrices.
    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Self {
        assert_eq!(self.size, other.size, "matrix sizes differ");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { size: self.size, data }
    }

    fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.size..(r + 1) * self.size]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaddingMode {
    /// Rows are tiled back to back; edge effect at row seams.
    #[default]
    None,
    /// Each row carries its own zero border before tiling.
    ZeroPadEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TilingVariant {
    RowTiling,
    PartialRowTiling,
    RowPartitioning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    Same,
    Valid,
}

/// Chosen variant and its derived counts for one `(S_i, S_k, n_conv)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TilingPlan {
    pub variant: TilingVariant,
    pub s_i: usize,
    pub s_k: usize,
    pub n_conv: usize,
    pub padding: PaddingMode,
    /// Width of one tiled row, `S_i` or `S_i + S_k - 1` with padding.
    pub row_width: usize,
    /// Input rows that fit one 1D signal (`N_ir`); 1 for partitioning.
    pub rows_per_step: usize,
    /// Complete output rows per 1D correlation (`N_or`); 0 when each step
    /// only produces a partial row.
    pub valid_rows_per_step: usize,
    /// Kernel rows handled together in partial row tiling.
    pub kernel_row_groups: usize,
    /// Row segments per padded row in row partitioning.
    pub partitions_per_row: usize,
    /// Number of 1D correlations.
    pub steps: usize,
    /// Hardware cycles, one 1D correlation each.
    pub cycles: usize,
}

/// Number of zero rows/columns placed before the image in `same` mode.
pub fn leading_pad(s_k: usize) -> usize {
    s_k / 2
}

pub fn plan_tiling(s_i: usize, s_k: usize, n_conv: usize, padding: PaddingMode) -> Result<TilingPlan, TilingError> {
    if s_k == 0 || s_i == 0 || s_k > s_i {
        return Err(TilingError::KernelTooLarge { s_i, s_k });
    }
    if n_conv < s_k {
        return Err(TilingError::Infeasible { s_k, n_conv });
    }
    let row_width = match padding {
        PaddingMode::None => s_i,
        PaddingMode::ZeroPadEdges => s_i + s_k - 1,
    };
    let fit = n_conv / row_width;
    let mut plan = TilingPlan {
        variant: TilingVariant::RowTiling,
        s_i,
        s_k,
        n_conv,
        padding,
        row_width,
        rows_per_step: fit,
        valid_rows_per_step: 0,
        kernel_row_groups: 1,
        partitions_per_row: 1,
        steps: 0,
        cycles: 0,
    };
    if n_conv > s_k * row_width {
        let n_or = fit - s_k + 1;
        plan.valid_rows_per_step = n_or;
        plan.steps = s_i.div_ceil(n_or);
    } else if n_conv >= row_width {
        plan.variant = TilingVariant::PartialRowTiling;
        plan.kernel_row_groups = s_k.div_ceil(fit);
        plan.steps = s_i * plan.kernel_row_groups;
    } else {
        plan.variant = TilingVariant::RowPartitioning;
        plan.rows_per_step = 1;
        plan.partitions_per_row = row_width.div_ceil(n_conv);
        plan.steps = s_i * s_k * plan.partitions_per_row;
    }
    plan.cycles = plan.steps;
    Ok(plan)
}

/// What a single step computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepTarget {
    /// Complete output rows `[first_row, first_row + rows)`.
    Rows { first_row: usize, rows: usize },
    /// Contribution of kernel rows `[kernel_row, kernel_row + kernel_rows)`
    /// to one output row.
    PartialRow { output_row: usize, kernel_row: usize, kernel_rows: usize },
    /// Contribution of one kernel row and one row segment starting at
    /// padded column `column` to one output row.
    Partition { output_row: usize, kernel_row: usize, column: usize, width: usize },
}

impl TilingPlan {
    pub fn step_target(&self, step: usize) -> Result<StepTarget, TilingError> {
        if step >= self.steps {
            return Err(TilingError::StepOutOfRange { step, steps: self.steps });
        }
        Ok(match self.variant {
            TilingVariant::RowTiling => {
                let first_row = step * self.valid_rows_per_step;
                let rows = self.valid_rows_per_step.min(self.s_i - first_row);
                StepTarget::Rows { first_row, rows }
            }
            TilingVariant::PartialRowTiling => {
                let group = step % self.kernel_row_groups;
                let kernel_row = group * self.rows_per_step;
                StepTarget::PartialRow {
                    output_row: step / self.kernel_row_groups,
                    kernel_row,
                    kernel_rows: self.rows_per_step.min(self.s_k - kernel_row),
                }
            }
            TilingVariant::RowPartitioning => {
                let part = step % self.partitions_per_row;
                let rest = step / self.partitions_per_row;
                let column = part * self.n_conv;
                StepTarget::Partition {
                    output_row: rest / self.s_k,
                    kernel_row: rest % self.s_k,
                    column,
                    width: self.n_conv.min(self.row_width - column),
                }
            }
        })
    }

    /// Total output rows each step completes, summed over all steps.
    pub fn emitted_rows(&self) -> usize {
        (0..self.steps)
            .filter_map(|s| match self.step_target(s) {
                Ok(StepTarget::Rows { rows, .. }) => Some(rows),
                Ok(StepTarget::PartialRow { kernel_row, kernel_rows, .. }) if kernel_row + kernel_rows == self.s_k => {
                    Some(1)
                }
                Ok(StepTarget::Partition { kernel_row, column, width, .. })
                    if kernel_row + 1 == self.s_k && column + width == self.row_width =>
                {
                    Some(1)
                }
                _ => None,
            })
            .sum()
    }

    /// Offset between output column and correlation lag inside a row.
    fn column_shift(&self) -> isize {
        match self.padding {
            PaddingMode::None => leading_pad(self.s_k) as isize,
            PaddingMode::ZeroPadEdges => 0,
        }
    }
}

/// One tiled 1D input/kernel pair, each `n_conv` long.
#[derive(Debug, Clone, PartialEq)]
pub struct TiledPair<T> {
    pub input_1d: Signal1D<T>,
    pub kernel_1d: Signal1D<T>,
    pub step_index: usize,
    pub target: StepTarget,
}

/// Row `v` of the vertically padded image, laid out with the plan's row
/// width. Rows outside the image are zero.
fn padded_row<T: Scalar>(img: &Image2D<T>, plan: &TilingPlan, v: usize, out: &mut Vec<T>) {
    let p = leading_pad(plan.s_k);
    let lead = plan.row_width - plan.s_i;
    let lead = match plan.padding {
        PaddingMode::None => 0,
        PaddingMode::ZeroPadEdges => lead.min(p),
    };
    let start = out.len();
    out.resize(start + plan.row_width, T::zero());
    if v >= p && v - p < img.size() {
        out[start + lead..start + lead + plan.s_i].copy_from_slice(img.row(v - p));
    }
}

fn kernel_rows_1d<T: Scalar>(ker: &Kernel2D<T>, rows: std::ops::Range<usize>, width: usize, n_conv: usize) -> Vec<T> {
    let mut k = Vec::with_capacity(n_conv);
    for (i, u) in rows.enumerate() {
        if i > 0 {
            k.resize(k.len() + width - ker.size(), T::zero());
        }
        k.extend_from_slice(ker.row(u));
    }
    k.resize(n_conv, T::zero());
    k
}

fn check_operands<T: Scalar>(img: &Image2D<T>, ker: &Kernel2D<T>, plan: &TilingPlan) -> Result<(), TilingError> {
    if img.size() != plan.s_i || ker.size() != plan.s_k {
        return Err(TilingError::PlanMismatch {
            plan_s_i: plan.s_i,
            plan_s_k: plan.s_k,
            s_i: img.size(),
            s_k: ker.size(),
        });
    }
    Ok(())
}

/// Builds the 1D operands of one step.
pub fn tile_step<T: Scalar>(
    img: &Image2D<T>,
    ker: &Kernel2D<T>,
    plan: &TilingPlan,
    step: usize,
) -> Result<TiledPair<T>, TilingError> {
    check_operands(img, ker, plan)?;
    let target = plan.step_target(step)?;
    let n = plan.n_conv;
    let mut input = Vec::with_capacity(n);
    let kernel = match target {
        StepTarget::Rows { first_row, rows } => {
            for v in first_row..first_row + rows + plan.s_k - 1 {
                padded_row(img, plan, v, &mut input);
            }
            kernel_rows_1d(ker, 0..plan.s_k, plan.row_width, n)
        }
        StepTarget::PartialRow { output_row, kernel_row, kernel_rows } => {
            for v in output_row + kernel_row..output_row + kernel_row + kernel_rows {
                padded_row(img, plan, v, &mut input);
            }
            kernel_rows_1d(ker, kernel_row..kernel_row + kernel_rows, plan.row_width, n)
        }
        StepTarget::Partition { output_row, kernel_row, column, width } => {
            let mut row = Vec::with_capacity(plan.row_width);
            padded_row(img, plan, output_row + kernel_row, &mut row);
            input.extend_from_slice(&row[column..column + width]);
            kernel_rows_1d(ker, kernel_row..kernel_row + 1, plan.row_width, n)
        }
    };
    debug_assert!(input.len() <= n);
    input.resize(n, T::zero());
    Ok(TiledPair { input_1d: Signal1D::new(input)?, kernel_1d: Signal1D::new(kernel)?, step_index: step, target })
}

/// Tiles real image rows `[first_row, first_row + count)` with no vertical
/// padding, together with the whole tiled kernel. This is the valid-mode
/// view of a row-tiling step.
pub fn tile_rows<T: Scalar>(
    img: &Image2D<T>,
    ker: &Kernel2D<T>,
    plan: &TilingPlan,
    first_row: usize,
    count: usize,
) -> Result<TiledPair<T>, TilingError> {
    check_operands(img, ker, plan)?;
    if count < plan.s_k || first_row + count > plan.s_i || count * plan.row_width > plan.n_conv {
        return Err(TilingError::StepOutOfRange { step: first_row, steps: plan.s_i });
    }
    let p = leading_pad(plan.s_k);
    let mut input = Vec::with_capacity(plan.n_conv);
    for r in first_row..first_row + count {
        // padded_row counts rows from the top of the vertically padded image
        padded_row(img, plan, r + p, &mut input);
    }
    input.resize(plan.n_conv, T::zero());
    let kernel = kernel_rows_1d(ker, 0..plan.s_k, plan.row_width, plan.n_conv);
    Ok(TiledPair {
        input_1d: Signal1D::new(input)?,
        kernel_1d: Signal1D::new(kernel)?,
        step_index: first_row,
        target: StepTarget::Rows { first_row, rows: count + 1 - plan.s_k },
    })
}

/// The `n_conv` samples of a full correlation centred on the tiled kernel's
/// middle row, lags `[-p * W, n_conv - p * W)`. For a valid-mode tile the
/// complete output rows are the `N_or * W` samples starting at `p * W`.
pub fn same_aligned_window<T: Scalar>(conv_out: &[T], plan: &TilingPlan) -> Result<Vec<T>, TilingError> {
    let expected = 2 * plan.n_conv - 1;
    if conv_out.len() != expected {
        return Err(TilingError::LengthMismatch { expected, got: conv_out.len() });
    }
    let start = plan.n_conv - 1 - leading_pad(plan.s_k) * plan.row_width;
    Ok(conv_out[start..start + plan.n_conv].to_vec())
}

/// Pulls the output rows (or partial row) a step contributes out of the
/// full 1D correlation of its tiled pair.
///
/// `conv_out` must have `2 * n_conv - 1` samples. Each returned row has
/// `S_i` samples. For `RowTiling` these are complete rows; for the other
/// variants they are contributions that still need summing.
pub fn extract_valid_rows<T: Scalar>(
    conv_out: &[T],
    plan: &TilingPlan,
    step: usize,
) -> Result<Vec<Vec<T>>, TilingError> {
    let expected = 2 * plan.n_conv - 1;
    if conv_out.len() != expected {
        return Err(TilingError::LengthMismatch { expected, got: conv_out.len() });
    }
    let zero_lag = plan.n_conv as isize - 1;
    let shift = plan.column_shift();
    let lag = |l: isize| -> T {
        let t = l + zero_lag;
        if t < 0 || t as usize >= conv_out.len() {
            T::zero()
        } else {
            conv_out[t as usize]
        }
    };
    let w = plan.row_width as isize;
    let row_at = |a: usize, offset: isize| -> Vec<T> {
        (0..plan.s_i).map(|j| lag(a as isize * w + j as isize - shift - offset)).collect()
    };
    Ok(match plan.step_target(step)? {
        StepTarget::Rows { rows, .. } => (0..rows).map(|a| row_at(a, 0)).collect(),
        StepTarget::PartialRow { .. } => vec![row_at(0, 0)],
        StepTarget::Partition { column, .. } => vec![row_at(0, column as isize)],
    })
}

/// Runs every step of `plan` through `backend` and hands each step's rows
/// to `sink`.
fn run_plan<T: Scalar, B: Correlator1D<T> + ?Sized>(
    img: &Image2D<T>,
    ker: &Kernel2D<T>,
    plan: &TilingPlan,
    backend: &B,
    mut sink: impl FnMut(StepTarget, Vec<Vec<T>>),
) -> Result<(), TilingError> {
    for step in 0..plan.steps {
        let pair = tile_step(img, ker, plan, step)?;
        let y = backend.correlate(pair.input_1d.samples(), pair.kernel_1d.samples())?;
        let rows = extract_valid_rows(&y, plan, step)?;
        sink(pair.target, rows);
    }
    Ok(())
}

/// `same`-mode 2D cross-correlation through a 1D backend.
pub fn conv2d_via_1d<T: Scalar, B: Correlator1D<T> + ?Sized>(
    img: &Image2D<T>,
    ker: &Kernel2D<T>,
    n_conv: usize,
    backend: &B,
    padding: PaddingMode,
) -> Result<Image2D<T>, TilingError> {
    let plan = plan_tiling(img.size(), ker.size(), n_conv, padding)?;
    conv2d_with_plan(img, ker, &plan, backend)
}

pub fn conv2d_with_plan<T: Scalar, B: Correlator1D<T> + ?Sized>(
    img: &Image2D<T>,
    ker: &Kernel2D<T>,
    plan: &TilingPlan,
    backend: &B,
) -> Result<Image2D<T>, TilingError> {
    let mut out = Image2D::zeros(img.size());
    run_plan(img, ker, plan, backend, |target, rows| {
        let first = match target {
            StepTarget::Rows { first_row, .. } => first_row,
            StepTarget::PartialRow { output_row, .. } | StepTarget::Partition { output_row, .. } => output_row,
        };
        for (a, row) in rows.into_iter().enumerate() {
            for (o, v) in out.row_mut(first + a).iter_mut().zip(row) {
                *o += v;
            }
        }
    })?;
    Ok(out)
}

/// Per-step partial rows of a partial-row-tiling or partitioning plan,
/// in step order. Summing them per output row gives the convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialContribution<T> {
    pub step: usize,
    pub output_row: usize,
    pub values: Vec<T>,
}

pub fn partial_contributions<T: Scalar, B: Correlator1D<T> + ?Sized>(
    img: &Image2D<T>,
    ker: &Kernel2D<T>,
    plan: &TilingPlan,
    backend: &B,
) -> Result<Vec<PartialContribution<T>>, TilingError> {
    let mut parts = Vec::with_capacity(plan.steps);
    run_plan(img, ker, plan, backend, |target, rows| {
        let step = parts.len();
        match target {
            StepTarget::Rows { first_row, .. } => {
                for (a, values) in rows.into_iter().enumerate() {
                    parts.push(PartialContribution { step, output_row: first_row + a, values });
                }
            }
            StepTarget::PartialRow { output_row, .. } | StepTarget::Partition { output_row, .. } => {
                let values = rows.into_iter().next().unwrap_or_default();
                parts.push(PartialContribution { step, output_row, values });
            }
        }
    })?;
    Ok(parts)
}

/// Columns where the unpadded tiling can disagree with zero-padded 2D
/// correlation: the first `p` and last `S_k - 1 - p` of every row.
pub fn edge_effect_columns(s_i: usize, s_k: usize) -> Vec<usize> {
    let p = leading_pad(s_k);
    let trail = s_k - 1 - p;
    (0..s_i).filter(|&j| j < p || j + trail >= s_i).collect()
}

/// Textbook sliding-window cross-correlation.
///
/// `Same` zero-pads with `floor(S_k/2)` leading rows/columns and returns
/// `S_i x S_i`; `Valid` returns `(S_i - S_k + 1)^2`.
pub fn conv2d_reference<T: Scalar>(
    img: &Image2D<T>,
    ker: &Kernel2D<T>,
    mode: ConvMode,
) -> Result<Image2D<T>, TilingError> {
    let (s_i, s_k) = (img.size(), ker.size());
    if s_k > s_i {
        return Err(TilingError::KernelTooLarge { s_i, s_k });
    }
    let (out_size, pad) = match mode {
        ConvMode::Same => (s_i, leading_pad(s_k) as isize),
        ConvMode::Valid => (s_i - s_k + 1, 0),
    };
    Ok(Image2D::from_fn(out_size, |i, j| {
        let mut acc = T::zero();
        for u in 0..s_k {
            let r = i as isize + u as isize - pad;
            if r < 0 || r >= s_i as isize {
                continue;
            }
            for v in 0..s_k {
                let c = j as isize + v as isize - pad;
                if c >= 0 && c < s_i as isize {
                    acc += ker.get(u, v) * img.get(r as usize, c as usize);
                }
            }
        }
        acc
    }))
}
