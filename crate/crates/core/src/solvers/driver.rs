use ndarray::{s, Array2, ArrayView2};

use super::asc::{align_row_sums, augment_for_asc, rescale_row_sums, row_normalize};
use super::init::init_factors;
use super::nmf::nmf_step_frozen;
use super::rnmf::{rnmf_step_frozen, BlockSearch};
use super::{Algorithm, AscMode, FactorizationResult, SolverConfig, Termination};
use crate::costs::{euclidean_cost, rnmf_cost};
use crate::error::{Result, UnmixError};
use crate::model::{AbundanceMatrix, EndmemberMatrix, ObservationMatrix};
use crate::scalar::Scalar;

/// Snapshot handed to the observer after every iteration.
///
/// Under [`AscMode::Augmentation`] the factors include the appended column.
#[derive(Debug)]
pub struct IterationRecord<'a, T> {
    pub iteration: usize,
    pub w: ArrayView2<'a, T>,
    pub h: ArrayView2<'a, T>,
    pub cost: T,
    /// `(W search, H search)` for robust NMF iterations.
    pub searches: Option<(BlockSearch<T>, BlockSearch<T>)>,
}

pub fn solve<T: Scalar>(
    v: &ObservationMatrix<T>,
    config: &SolverConfig,
) -> Result<FactorizationResult<T>> {
    solve_with_observer(v, config, |_| {})
}

pub fn solve_with_observer<T: Scalar>(
    v: &ObservationMatrix<T>,
    config: &SolverConfig,
    observer: impl FnMut(&IterationRecord<'_, T>),
) -> Result<FactorizationResult<T>> {
    config.validate()?;
    let (w, h) = init_factors(v, config.endmembers, config.init, config.seed)?;
    solve_from(v, config, w, h, observer)
}

/// Runs the outer loop from caller-supplied factors (`config.init` and
/// `config.seed` are ignored).
pub fn solve_from<T: Scalar>(
    v: &ObservationMatrix<T>,
    config: &SolverConfig,
    w0: Array2<T>,
    h0: Array2<T>,
    mut observer: impl FnMut(&IterationRecord<'_, T>),
) -> Result<FactorizationResult<T>> {
    config.validate()?;
    let (m, l) = v.data().dim();
    let p = config.endmembers;
    if w0.dim() != (m, p) || h0.dim() != (p, l) {
        return Err(UnmixError::dims(format!(
            "initial factors {:?} and {:?} do not match V {m}x{l} with P = {p}",
            w0.dim(),
            h0.dim()
        )));
    }

    let (data, mut h, frozen) = match config.asc {
        AscMode::Augmentation { delta } => {
            let (va, ha) = augment_for_asc(v.view(), h0.view(), T::lit(delta));
            (va, ha, 1)
        }
        _ => (v.data().clone(), h0, 0),
    };
    let mut w = w0;
    let rescale = config.asc == AscMode::RowNormalize;
    if rescale {
        rescale_row_sums(&mut w, &mut h);
    }

    let epsilon = T::lit(config.epsilon);
    let objective = |w: &Array2<T>, h: &Array2<T>| match config.algorithm {
        Algorithm::Nmf => euclidean_cost(data.view(), w.view(), h.view()),
        Algorithm::Rnmf => rnmf_cost(data.view(), w.view(), h.view()),
    };

    let mut trace = vec![objective(&w, &h)?];
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;
    for it in 1..=config.max_iter {
        iterations = it;
        let searches = match config.algorithm {
            Algorithm::Nmf => {
                (w, h) = nmf_step_frozen(data.view(), w.view(), h.view(), epsilon, frozen)?;
                None
            }
            Algorithm::Rnmf => {
                let step = rnmf_step_frozen(data.view(), w.view(), h.view(), &config.armijo, frozen)?;
                w = step.w;
                h = step.h;
                Some((step.w_search, step.h_search))
            }
        };
        if rescale {
            rescale_row_sums(&mut w, &mut h);
        }
        let cost = objective(&w, &h)?;
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(cost);
        observer(&IterationRecord {
            iteration: it,
            w: w.view(),
            h: h.view(),
            cost,
            searches,
        });

        if let Some((sw, sh)) = searches {
            let moved = sw.accepted() || sh.accepted();
            if !moved {
                termination = if sw == BlockSearch::Stationary && sh == BlockSearch::Stationary {
                    Termination::Converged
                } else {
                    Termination::StalledLineSearch
                };
                break;
            }
        }
        let floor = T::lit(1e-30);
        if (cost - prev).abs() <= T::lit(config.rel_tol) * prev.max(floor) {
            termination = Termination::Converged;
            break;
        }
    }

    let mut h = h.slice(s![.., ..l]).to_owned();
    let abundances = match config.asc {
        AscMode::RowNormalize => {
            align_row_sums(&mut w, &mut h);
            // Pixels the fit assigns no material at all get an even split.
            let uniform = T::one() / T::lit(p as f64);
            for mut row in w.outer_iter_mut() {
                if !(row.sum() > T::zero()) {
                    row.fill(uniform);
                }
            }
            row_normalize(&AbundanceMatrix::new(w)?)?
        }
        _ => AbundanceMatrix::new(w)?,
    };
    let endmembers = EndmemberMatrix::new(h).map_err(|e| {
        UnmixError::Numerical(format!("solver produced an invalid endmember matrix: {e}"))
    })?;

    Ok(FactorizationResult {
        abundances,
        endmembers,
        cost_trace: trace,
        iterations,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::InitStrategy;
    use ndarray::{array, Axis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_obs(seed: u64, m: usize, l: usize) -> ObservationMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ObservationMatrix::new(Array2::from_shape_simple_fn((m, l), || rng.random::<f64>())).unwrap()
    }

    fn low_rank(seed: u64, m: usize, l: usize, p: usize) -> (Array2<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::from_shape_simple_fn((m, p), || rng.random::<f64>() + 0.05);
        for mut row in a.outer_iter_mut() {
            let s = row.sum();
            row /= s;
        }
        let e = Array2::from_shape_simple_fn((p, l), || rng.random::<f64>() + 0.1);
        (a, e)
    }

    fn rel_err(v: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
        let r = v - &w.dot(h);
        (r.iter().map(|x| x * x).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    #[test]
    fn rnmf_recovers_exact_low_rank() {
        let (a, e) = low_rank(4, 20, 8, 3);
        let v = ObservationMatrix::new(a.dot(&e)).unwrap();
        let mut cfg = SolverConfig::new(Algorithm::Rnmf, 3);
        cfg.init = InitStrategy::DataSampled;
        cfg.seed = 2;
        cfg.max_iter = 3000;
        cfg.rel_tol = 1e-12;
        let res = solve(&v, &cfg).unwrap();
        assert!(res.cost_trace.last().unwrap() <= &res.cost_trace[0]);
        let err = rel_err(v.data(), res.abundances.data(), res.endmembers.data());
        assert!(err < 1e-3, "relative error {err}");
    }

    #[test]
    fn deterministic_trace() {
        let v = random_obs(1, 12, 7);
        for algo in [Algorithm::Nmf, Algorithm::Rnmf] {
            let mut cfg = SolverConfig::new(algo, 2);
            cfg.seed = 99;
            cfg.max_iter = 40;
            let a = solve(&v, &cfg).unwrap();
            let b = solve(&v, &cfg).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn both_algorithms_monotone_with_table_dims() {
        let v = random_obs(2, 20, 10);
        for algo in [Algorithm::Nmf, Algorithm::Rnmf] {
            for asc in [AscMode::None, AscMode::RowNormalize, AscMode::Augmentation { delta: 10.0 }] {
                let mut cfg = SolverConfig::new(algo, 3);
                cfg.seed = 5;
                cfg.asc = asc;
                cfg.max_iter = 150;
                let res = solve(&v, &cfg).unwrap();
                for pair in res.cost_trace.windows(2) {
                    assert!(pair[1] <= pair[0] + 1e-10, "{algo} {asc:?}: {pair:?}");
                }
                assert_eq!(res.abundances.data().dim(), (20, 3));
                assert_eq!(res.endmembers.data().dim(), (3, 10));
                assert_eq!(res.cost_trace.len(), res.iterations + 1);
                if asc == AscMode::RowNormalize {
                    assert!(res.abundances.is_sum_to_one());
                }
            }
        }
    }

    #[test]
    fn exact_start_is_a_fixed_point() {
        let (a, e) = low_rank(6, 10, 6, 2);
        let v = ObservationMatrix::new(a.dot(&e)).unwrap();
        for algo in [Algorithm::Nmf, Algorithm::Rnmf] {
            let mut cfg = SolverConfig::new(algo, 2);
            cfg.asc = AscMode::None;
            cfg.max_iter = 1;
            let res = solve_from(&v, &cfg, a.clone(), e.clone(), |_| {}).unwrap();
            for (x, y) in res.abundances.data().iter().zip(a.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
            for (x, y) in res.endmembers.data().iter().zip(e.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
            if algo == Algorithm::Rnmf {
                assert_eq!(res.termination, Termination::Converged);
            }
        }
    }

    #[test]
    fn augmentation_pushes_rows_towards_unit_sum() {
        let a: Array2<f64> = array![[0.3, 0.7], [0.8, 0.2]];
        let e = array![[0.9, 0.5, 0.1, 0.3], [0.1, 0.4, 0.8, 0.6]];
        let v = ObservationMatrix::new(a.dot(&e)).unwrap();
        for algo in [Algorithm::Nmf, Algorithm::Rnmf] {
            let mut cfg = SolverConfig::new(algo, 2);
            cfg.asc = AscMode::Augmentation { delta: 10.0 };
            cfg.max_iter = 5000;
            cfg.rel_tol = 1e-14;
            cfg.seed = 3;
            let res = solve(&v, &cfg).unwrap();
            for row in res.abundances.data().outer_iter() {
                assert!((row.sum() - 1.0).abs() < 0.02, "{algo}: row sum {}", row.sum());
            }
        }
    }

    #[test]
    fn permuted_start_permutes_output() {
        let v = random_obs(3, 9, 7);
        let (w0, h0) = init_factors(&v, 3, InitStrategy::RandomUniform, 4).unwrap();
        let perm = [2, 0, 1];
        for algo in [Algorithm::Nmf, Algorithm::Rnmf] {
            let mut cfg = SolverConfig::new(algo, 3);
            cfg.asc = AscMode::None;
            cfg.max_iter = 60;
            let base = solve_from(&v, &cfg, w0.clone(), h0.clone(), |_| {}).unwrap();
            let permuted = solve_from(
                &v,
                &cfg,
                w0.select(Axis(1), &perm),
                h0.select(Axis(0), &perm),
                |_| {},
            )
            .unwrap();
            assert_eq!(base.iterations, permuted.iterations);
            for (x, y) in base.cost_trace.iter().zip(permuted.cost_trace.iter()) {
                assert!((x - y).abs() <= 1e-9 * x.max(1e-12));
            }
            let expect_w = base.abundances.data().select(Axis(1), &perm);
            for (x, y) in expect_w.iter().zip(permuted.abundances.data().iter()) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn invalid_config_and_rank() {
        let v = random_obs(0, 4, 4);
        let mut cfg = SolverConfig::new(Algorithm::Nmf, 5);
        assert!(matches!(solve(&v, &cfg), Err(UnmixError::InvalidRank { .. })));
        cfg.endmembers = 2;
        cfg.max_iter = 0;
        assert!(matches!(solve(&v, &cfg), Err(UnmixError::InvalidConfig(_))));
    }

    #[test]
    fn runs_in_single_precision() {
        let v = ObservationMatrix::new(random_obs(7, 10, 6).data().mapv(|x| x as f32)).unwrap();
        let mut cfg = SolverConfig::new(Algorithm::Rnmf, 2);
        cfg.max_iter = 50;
        let res = solve(&v, &cfg).unwrap();
        assert!(res.cost_trace.last().unwrap() <= &res.cost_trace[0]);
    }
}
