use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{InitStrategy, SolverConfig};
use crate::error::{Result, UnmixError};
use crate::model::ObservationMatrix;
use crate::scalar::Scalar;

fn uniform_open_closed<T: Scalar>(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Array2<T> {
    // `random` is [0, 1); flip it onto (0, 1]
    Array2::from_shape_simple_fn(shape, || T::lit(1.0 - rng.random::<f64>()))
}

/// Strictly positive starting factors `(W, H)`, deterministic in `seed`.
pub fn init_factors<T: Scalar>(
    v: &ObservationMatrix<T>,
    endmembers: usize,
    strategy: InitStrategy,
    seed: u64,
) -> Result<(Array2<T>, Array2<T>)> {
    let (m, l) = v.data().dim();
    if endmembers == 0 || endmembers > m.min(l) {
        return Err(UnmixError::InvalidRank {
            endmembers,
            pixels: m,
            bands: l,
        });
    }
    let v_mean = v.data().mean().unwrap_or(T::zero());
    if !(v_mean > T::zero()) {
        return Err(UnmixError::DegenerateData(
            "observation matrix has no positive entry".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match strategy {
        InitStrategy::RandomUniform => {
            let mut w = uniform_open_closed::<T>(&mut rng, (m, endmembers));
            let mut h = uniform_open_closed::<T>(&mut rng, (endmembers, l));
            let wh_mean = w.dot(&h).mean().expect("non-empty");
            let alpha = (v_mean / wh_mean).sqrt();
            w *= alpha;
            h *= alpha;
            Ok((w, h))
        }
        InitStrategy::DataSampled => {
            let picks = rand::seq::index::sample(&mut rng, m, endmembers).into_vec();
            let floor = T::lit(SolverConfig::DEFAULT_EPSILON);
            let h = v.data().select(Axis(0), &picks).mapv(|x| x + floor);
            let mut w = uniform_open_closed::<T>(&mut rng, (m, endmembers));
            let wh_mean = w.dot(&h).mean().expect("non-empty");
            w *= v_mean / wh_mean;
            Ok((w, h))
        }
    }
}
