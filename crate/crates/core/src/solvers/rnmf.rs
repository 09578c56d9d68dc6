use ndarray::{s, Array2, ArrayView2, Zip};

use super::armijo::{search, ArmijoParams};
use crate::costs::{check_conformant, residual, rnmf_cost_from_sq_norm, sq_norm};
use crate::error::Result;
use crate::scalar::Scalar;

/// What the line search did for one factor block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockSearch<T> {
    /// The projected descent direction vanished; the block was left as is.
    Stationary,
    Accepted {
        step: T,
        /// Secant slope of the projected path at `step`, `g · (x(step) − x) / step`
        /// in units of the scaled gradient `g`. Equals `−Σ g²` when no entry
        /// was clipped at zero.
        slope: T,
        cost_before: T,
        cost_after: T,
        backtracks: usize,
    },
    /// Every trial step failed the sufficient-decrease test. `slope` is the
    /// derivative at zero, `−Σ g²` over entries free to move.
    Rejected { slope: T, cost_before: T },
}

impl<T> BlockSearch<T> {
    pub fn accepted(&self) -> bool {
        matches!(self, BlockSearch::Accepted { .. })
    }
}

#[derive(Debug, Clone)]
pub struct RnmfStep<T> {
    pub w: Array2<T>,
    pub h: Array2<T>,
    pub w_search: BlockSearch<T>,
    pub h_search: BlockSearch<T>,
}

impl<T> RnmfStep<T> {
    pub fn accepted_w(&self) -> bool {
        self.w_search.accepted()
    }

    pub fn accepted_h(&self) -> bool {
        self.h_search.accepted()
    }
}

/// Zeroes gradient entries whose coordinate sits on the bound and would be
/// pushed below it, and returns `−Σ g²` over the remaining entries.
fn free_direction<T: Scalar>(x: &ArrayView2<'_, T>, grad: &mut Array2<T>) -> T {
    let mut slope = T::zero();
    Zip::from(grad).and(x).for_each(|g, &xi| {
        if xi <= T::zero() && *g > T::zero() {
            *g = T::zero();
        } else {
            slope -= *g * *g;
        }
    });
    slope
}

/// `P(x − step·dir)` and the secant slope `dir · (P(x − step·dir) − x) / step`.
fn projected<T: Scalar>(x: &ArrayView2<'_, T>, dir: &Array2<T>, step: T) -> (Array2<T>, T) {
    let mut out = x.to_owned();
    let mut moved = T::zero();
    Zip::from(&mut out).and(dir).for_each(|xi, &d| {
        let next = (*xi - step * d).max(T::zero());
        moved += d * (next - *xi);
        *xi = next;
    });
    (out, moved / step)
}

/// Projected Armijo step on `W` along `−(WHHᵀ − VHᵀ)/√(1 + ‖V − WH‖²)`.
pub fn rnmf_update_w<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    params: &ArmijoParams,
) -> Result<(Array2<T>, BlockSearch<T>)> {
    check_conformant(&v, &w, &h)?;
    let r = residual(&v, &w, &h);
    let s0 = sq_norm(&r);
    let cost_before = rnmf_cost_from_sq_norm(s0);
    let mut dir = r.dot(&h.t());
    dir /= (T::one() + s0).sqrt();
    let slope = free_direction(&w, &mut dir);
    if !(slope < T::zero()) {
        return Ok((w.to_owned(), BlockSearch::Stationary));
    }
    let (outcome, candidate) = search(cost_before, slope, params, |step| {
        let (cand, arc_slope) = projected(&w, &dir, step);
        let cost = rnmf_cost_from_sq_norm(sq_norm(&residual(&v, &cand.view(), &h)));
        (cost, arc_slope, cand)
    })?;
    Ok(finish(w, outcome, candidate, slope, cost_before))
}

/// Projected Armijo step on `H` along `−(WᵀWH − WᵀV)/√(1 + ‖V − WH‖²)`.
pub fn rnmf_update_h<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    params: &ArmijoParams,
) -> Result<(Array2<T>, BlockSearch<T>)> {
    rnmf_update_h_frozen(v, w, h, params, 0)
}

pub(crate) fn rnmf_update_h_frozen<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    params: &ArmijoParams,
    frozen_cols: usize,
) -> Result<(Array2<T>, BlockSearch<T>)> {
    check_conformant(&v, &w, &h)?;
    let r = residual(&v, &w, &h);
    let s0 = sq_norm(&r);
    let cost_before = rnmf_cost_from_sq_norm(s0);
    let mut dir = w.t().dot(&r);
    dir /= (T::one() + s0).sqrt();
    let free = h.ncols() - frozen_cols;
    dir.slice_mut(s![.., free..]).fill(T::zero());
    let slope = free_direction(&h, &mut dir);
    if !(slope < T::zero()) {
        return Ok((h.to_owned(), BlockSearch::Stationary));
    }
    let (outcome, candidate) = search(cost_before, slope, params, |step| {
        let (cand, arc_slope) = projected(&h, &dir, step);
        let cost = rnmf_cost_from_sq_norm(sq_norm(&residual(&v, &w, &cand.view())));
        (cost, arc_slope, cand)
    })?;
    Ok(finish(h, outcome, candidate, slope, cost_before))
}

fn finish<T: Scalar>(
    x: ArrayView2<'_, T>,
    outcome: super::LineSearchOutcome<T>,
    candidate: Option<Array2<T>>,
    slope: T,
    cost_before: T,
) -> (Array2<T>, BlockSearch<T>) {
    match candidate {
        Some(next) => (
            next,
            BlockSearch::Accepted {
                step: outcome.step,
                slope: outcome.slope,
                cost_before,
                cost_after: outcome.value,
                backtracks: outcome.backtracks,
            },
        ),
        None => (x.to_owned(), BlockSearch::Rejected { slope, cost_before }),
    }
}

/// One robust-NMF iteration: the `W` block, then the `H` block.
pub fn rnmf_step<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    params: &ArmijoParams,
) -> Result<RnmfStep<T>> {
    rnmf_step_frozen(v, w, h, params, 0)
}

pub(crate) fn rnmf_step_frozen<T: Scalar>(
    v: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    h: ArrayView2<'_, T>,
    params: &ArmijoParams,
    frozen_cols: usize,
) -> Result<RnmfStep<T>> {
    let (w_new, w_search) = rnmf_update_w(v, w, h, params)?;
    let (h_new, h_search) = rnmf_update_h_frozen(v, w_new.view(), h, params, frozen_cols)?;
    Ok(RnmfStep {
        w: w_new,
        h: h_new,
        w_search,
        h_search,
    })
}
