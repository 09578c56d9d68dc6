use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis};

use super::AscMode;
use crate::error::{Result, UnmixError};
use crate::linalg::solve_dense;
use crate::model::AbundanceMatrix;
use crate::scalar::Scalar;

/// Divides every abundance row by its sum.
pub fn row_normalize<T: Scalar>(w: &AbundanceMatrix<T>) -> Result<AbundanceMatrix<T>> {
    let mut out = w.data().clone();
    for (i, mut row) in out.outer_iter_mut().enumerate() {
        let s = row.sum();
        if !(s > T::zero()) {
            return Err(UnmixError::ZeroRow(i));
        }
        row /= s;
    }
    AbundanceMatrix::with_sum_to_one(out)
}

/// Applies the post-hoc part of `mode` to an abundance matrix. Only
/// [`AscMode::RowNormalize`] changes `w`; augmentation acts on the problem
/// instead (see [`augment_for_asc`]).
pub fn apply_asc<T: Scalar>(w: &AbundanceMatrix<T>, mode: AscMode) -> Result<AbundanceMatrix<T>> {
    match mode {
        AscMode::RowNormalize => row_normalize(w),
        AscMode::None | AscMode::Augmentation { .. } => Ok(w.clone()),
    }
}

/// Appends a constant column `delta` to both `V` and `H`. Fitting the
/// augmented system with that `H` column held fixed penalizes `Σₖ Wₘₖ ≠ 1`.
pub fn augment_for_asc<T: Scalar>(
    v: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    delta: T,
) -> (Array2<T>, Array2<T>) {
    let v_col = Array2::from_elem((v.nrows(), 1), delta);
    let h_col = Array2::from_elem((h.nrows(), 1), delta);
    (
        concatenate![Axis(1), v, v_col],
        concatenate![Axis(1), h, h_col],
    )
}

/// Multiplies `W` by `c = M / ΣW` and divides `H` by `c`, so `WH` is unchanged
/// and the mean abundance row sum is one. Relative component scales are left
/// alone.
pub fn rescale_row_sums<T: Scalar>(w: &mut Array2<T>, h: &mut Array2<T>) {
    let total = w.sum();
    if !(total > T::zero() && total.is_finite()) {
        return;
    }
    let c = T::lit(w.nrows() as f64) / total;
    *w *= c;
    *h /= c;
}

/// Rescales column `k` of `W` by `cₖ` and row `k` of `H` by `1/cₖ`, leaving
/// `WH` unchanged, with `c` the least-squares solution of `W c ≈ 1`. Falls back
/// to [`rescale_row_sums`] when that solution is not strictly positive.
///
/// Used once before the final row division, so that division perturbs the
/// product as little as possible.
pub fn align_row_sums<T: Scalar>(w: &mut Array2<T>, h: &mut Array2<T>) {
    let gram = w.t().dot(w);
    let rhs: Array1<T> = w.sum_axis(Axis(0));
    match solve_dense(&gram, &rhs) {
        Some(c) if c.iter().all(|x| x.is_finite() && *x > T::zero()) => {
            for (k, &ck) in c.iter().enumerate() {
                w.column_mut(k).mapv_inplace(|x| x * ck);
                h.row_mut(k).mapv_inplace(|x| x / ck);
            }
        }
        _ => rescale_row_sums(w, h),
    }
}
