//! Factorization solvers.
//!
//! Two algorithms share one outer loop ([`solve`]):
//!
//! * **NMF**: multiplicative updates on the squared Euclidean cost, `H`
//!   first then `W`, with denominators and factors floored at `epsilon`.
//! * **RNMF**: additive descent on the hypersurface cost. Each factor block
//!   (`W` first, then `H`) takes one projected step along the negative scaled
//!   gradient, with a single Armijo step size per block.
//!
//! Sum-to-one handling is selected by [`AscMode`].

mod armijo;
mod asc;
mod driver;
mod init;
mod nmf;
mod rnmf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UnmixError};
use crate::model::{AbundanceMatrix, EndmemberMatrix};

pub use armijo::{armijo_step_size, ArmijoParams, LineSearchOutcome};
pub use asc::{align_row_sums, apply_asc, augment_for_asc, rescale_row_sums, row_normalize};
pub use driver::{solve, solve_from, solve_with_observer, IterationRecord};
pub use init::init_factors;
pub use nmf::nmf_step;
pub use rnmf::{rnmf_step, rnmf_update_h, rnmf_update_w, BlockSearch, RnmfStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nmf,
    Rnmf,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Nmf => "nmf",
            Algorithm::Rnmf => "rnmf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// I.i.d. uniform on `(0, 1]`, rescaled so `mean(WH) == mean(V)`.
    RandomUniform,
    /// `H` rows are distinct rows of `V` (plus a small floor).
    DataSampled,
}

/// How the abundance sum-to-one constraint is treated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AscMode {
    None,
    /// `W` is rescaled every iteration to unit mean row sum (compensated in
    /// `H`, so the product is unchanged). On exit components are rescaled so
    /// row sums are as close to one as possible, then rows are divided by
    /// their sums.
    RowNormalize,
    /// A constant column `delta` is appended to both `V` and `H`, the `H`
    /// column is held fixed, and the fit pulls row sums of `W` towards one.
    Augmentation { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    StalledLineSearch,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::StalledLineSearch => "stalled_line_search",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub endmembers: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub init: InitStrategy,
    pub asc: AscMode,
    pub armijo: ArmijoParams,
    pub epsilon: f64,
}

impl SolverConfig {
    pub const DEFAULT_MAX_ITER: usize = 500;
    pub const DEFAULT_REL_TOL: f64 = 1e-6;
    pub const DEFAULT_EPSILON: f64 = 1e-12;
    pub const DEFAULT_AUGMENTATION_DELTA: f64 = 10.0;

    pub fn new(algorithm: Algorithm, endmembers: usize) -> Self {
        Self {
            algorithm,
            endmembers,
            max_iter: Self::DEFAULT_MAX_ITER,
            rel_tol: Self::DEFAULT_REL_TOL,
            seed: 0,
            init: InitStrategy::RandomUniform,
            asc: AscMode::RowNormalize,
            armijo: ArmijoParams::default(),
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(UnmixError::InvalidConfig(msg.to_string()));
        if self.endmembers == 0 {
            return bad("endmember count must be at least 1");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if let AscMode::Augmentation { delta } = self.asc {
            if !(delta > 0.0 && delta.is_finite()) {
                return bad("augmentation delta must be positive");
            }
        }
        self.armijo.validate()
    }
}

/// Factors produced by [`solve`], with the per-iteration objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationResult<T> {
    pub abundances: AbundanceMatrix<T>,
    pub endmembers: EndmemberMatrix<T>,
    /// Objective before the first iteration followed by one entry per iteration.
    pub cost_trace: Vec<T>,
    pub iterations: usize,
    pub termination: Termination,
}
