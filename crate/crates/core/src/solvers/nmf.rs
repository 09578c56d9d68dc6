use ndarray::{s, Array2, ArrayView2, Zip};

use crate::costs::check_conformant;
use crate::error::Result;
use crate::scalar::Scalar;

/// One round of multiplicative updates for the squared Euclidean cost:
/// `H ← H ⊙ WᵀV / WᵀWH` followed by `W ← W ⊙ VHᵀ / WHHᵀ`. Denominators and
/// the updated factors are floored at `epsilon`.
pub fn nmf_step<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    epsilon: T,
) -> Result<(Array2<T>, Array2<T>)> {
    nmf_step_frozen(v, w, h, epsilon, 0)
}

/// As [`nmf_step`], leaving the last `frozen_cols` columns of `H` untouched.
pub(crate) fn nmf_step_frozen<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    epsilon: T,
    frozen_cols: usize,
) -> Result<(Array2<T>, Array2<T>)> {
    check_conformant(&v, &w, &h)?;
    let free = h.ncols() - frozen_cols;

    let numer = w.t().dot(&v);
    let denom = w.t().dot(&w).dot(&h);
    let mut h_new = h.to_owned();
    Zip::from(h_new.slice_mut(s![.., ..free]))
        .and(numer.slice(s![.., ..free]))
        .and(denom.slice(s![.., ..free]))
        .for_each(|x, &n, &d| *x = (*x * n / d.max(epsilon)).max(epsilon));

    let numer = v.dot(&h_new.t());
    let denom = w.dot(&h_new).dot(&h_new.t());
    let mut w_new = w.to_owned();
    Zip::from(&mut w_new)
        .and(&numer)
        .and(&denom)
        .for_each(|x, &n, &d| *x = (*x * n / d.max(epsilon)).max(epsilon));

    Ok((w_new, h_new))
}
