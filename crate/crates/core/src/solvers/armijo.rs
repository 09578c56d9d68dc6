use serde::{Deserialize, Serialize};

use crate::error::{Result, UnmixError};
use crate::scalar::Scalar;

/// Backtracking parameters: trial steps are `initial_step · shrinkᵏ` for
/// `k = 0..=max_backtracks`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoParams {
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 30,
        }
    }
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(UnmixError::InvalidConfig("armijo initial_step must be positive".into()));
        }
        if !open_unit(self.shrink) {
            return Err(UnmixError::InvalidConfig("armijo shrink must lie in (0, 1)".into()));
        }
        if !open_unit(self.sufficient_decrease) {
            return Err(UnmixError::InvalidConfig(
                "armijo sufficient_decrease must lie in (0, 1)".into(),
            ));
        }
        if self.max_backtracks == 0 {
            return Err(UnmixError::InvalidConfig("armijo max_backtracks must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome<T> {
    /// Accepted step, or zero when every trial failed.
    pub step: T,
    pub accepted: bool,
    /// Objective at `step` (equal to `initial_value` on failure).
    pub value: T,
    pub initial_value: T,
    /// Slope used in the sufficient-decrease test of the accepted step (the
    /// slope at zero on failure).
    pub slope: T,
    pub backtracks: usize,
}

/// Backtracking search for the largest trial step satisfying
/// `objective(step) ≤ objective(0) + c · step · slope`.
pub fn armijo_step_size<T: Scalar>(
    mut objective: impl FnMut(T) -> T,
    slope: T,
    params: &ArmijoParams,
) -> Result<LineSearchOutcome<T>> {
    let f0 = objective(T::zero());
    search(f0, slope, params, |s| (objective(s), slope, ())).map(|(outcome, _)| outcome)
}

/// Backtracking with a per-trial reference slope. `eval(step)` returns the
/// objective, the slope to test it against, and a payload (typically the
/// candidate iterate) handed back for the accepted step.
///
/// For a projected path `x(s) = P(x − s·d)` the reference slope is
/// `d · (x(s) − x) / s`, which equals `slope0` while nothing is clipped.
pub(crate) fn search<T: Scalar, C>(
    f0: T,
    slope0: T,
    params: &ArmijoParams,
    mut eval: impl FnMut(T) -> (T, T, C),
) -> Result<(LineSearchOutcome<T>, Option<C>)> {
    if !(slope0 < T::zero()) {
        return Err(UnmixError::NotDescentDirection(slope0.as_f64()));
    }
    let c = T::lit(params.sufficient_decrease);
    let shrink = T::lit(params.shrink);
    let mut step = T::lit(params.initial_step);
    for k in 0..=params.max_backtracks {
        let (value, slope, payload) = eval(step);
        if slope < T::zero() && value <= f0 + c * step * slope {
            return Ok((
                LineSearchOutcome {
                    step,
                    accepted: true,
                    value,
                    initial_value: f0,
                    slope,
                    backtracks: k,
                },
                Some(payload),
            ));
        }
        step *= shrink;
    }
    Ok((
        LineSearchOutcome {
            step: T::zero(),
            accepted: false,
            value: f0,
            initial_value: f0,
            slope: slope0,
            backtracks: params.max_backtracks,
        },
        None,
    ))
}
