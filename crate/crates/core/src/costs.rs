//! Reconstruction costs and the robust-NMF descent directions.
//!
//! All functions take the data `V` (`M × L`), abundances `W` (`M × P`) and
//! endmembers `H` (`P × L`) as plain views so the solvers can call them on
//! their working buffers.

use ndarray::{Array2, ArrayView2};

use crate::error::{Result, UnmixError};
use crate::scalar::Scalar;

/// `√(1 + t²) − 1`: quadratic near zero, linear in the tails.
pub fn hypersurface<T: Scalar>(t: T) -> T {
    (T::one() + t * t).sqrt() - T::one()
}

pub(crate) fn check_conformant<T>(
    v: &ArrayView2<'_, T>,
    w: &ArrayView2<'_, T>,
    h: &ArrayView2<'_, T>,
) -> Result<()> {
    let (m, l) = v.dim();
    let (mw, pw) = w.dim();
    let (ph, lh) = h.dim();
    if m != mw || l != lh || pw != ph {
        return Err(UnmixError::dims(format!(
            "V is {m}x{l}, W is {mw}x{pw}, H is {ph}x{lh}"
        )));
    }
    Ok(())
}

/// `WH − V`.
pub(crate) fn residual<T: Scalar>(
    v: &ArrayView2<'_, T>,
    w: &ArrayView2<'_, T>,
    h: &ArrayView2<'_, T>,
) -> Array2<T> {
    let mut r = w.dot(h);
    r -= v;
    r
}

pub(crate) fn sq_norm<T: Scalar>(a: &Array2<T>) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

/// Squared Frobenius norm `‖V − WH‖²`.
pub fn euclidean_cost<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
) -> Result<T> {
    check_conformant(&v, &w, &h)?;
    Ok(sq_norm(&residual(&v, &w, &h)))
}

/// Robust objective `½(√(1 + ‖V − WH‖²) − 1)`, i.e. half the hypersurface
/// function of the residual's Frobenius norm.
pub fn rnmf_cost<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
) -> Result<T> {
    check_conformant(&v, &w, &h)?;
    Ok(rnmf_cost_from_sq_norm(sq_norm(&residual(&v, &w, &h))))
}

pub(crate) fn rnmf_cost_from_sq_norm<T: Scalar>(s: T) -> T {
    T::lit(0.5) * ((T::one() + s).sqrt() - T::one())
}

/// `(WHHᵀ − VHᵀ) / √(1 + ‖V − WH‖²)`.
///
/// This is twice the gradient of [`rnmf_cost`] with respect to `W`; the factor
/// is absorbed by the line search.
pub fn rnmf_grad_w<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
) -> Result<Array2<T>> {
    check_conformant(&v, &w, &h)?;
    let r = residual(&v, &w, &h);
    let scale = (T::one() + sq_norm(&r)).sqrt();
    let mut g = r.dot(&h.t());
    g /= scale;
    Ok(g)
}

/// `(WᵀWH − WᵀV) / √(1 + ‖V − WH‖²)`, twice the gradient of [`rnmf_cost`]
/// with respect to `H`.
pub fn rnmf_grad_h<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
) -> Result<Array2<T>> {
    check_conformant(&v, &w, &h)?;
    let r = residual(&v, &w, &h);
    let scale = (T::one() + sq_norm(&r)).sqrt();
    let mut g = w.t().dot(&r);
    g /= scale;
    Ok(g)
}
