//! Angle-based unmixing scores.
//!
//! Endmember signatures are compared with the spectral angle (SAD) and
//! per-pixel abundance vectors with the abundance angle (AAD); both are
//! aggregated as root-mean-square values. Estimated endmembers come out of a
//! factorization in arbitrary order, so they are first aligned to the truth by
//! exhaustive minimum-total-SAD matching.

use ndarray::{ArrayView1, Axis};

use crate::error::{Result, UnmixError};
use crate::model::{AbundanceMatrix, EndmemberMatrix};
use crate::scalar::Scalar;

/// Largest endmember count accepted by [`match_endmembers`] (10! orderings).
pub const MAX_EXHAUSTIVE_ENDMEMBERS: usize = 10;

/// Angle in radians between two vectors, `arccos(xᵀy / (‖x‖‖y‖))`.
///
/// Evaluated as `2·atan2(‖x̂ − ŷ‖, ‖x̂ + ŷ‖)` on the unit vectors, which equals
/// the arccosine form but stays accurate for nearly parallel inputs, where
/// `acos(1 − ε)` loses half the significant digits.
pub fn angle<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(UnmixError::dims(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let norm = |v: &[T]| v.iter().fold(T::zero(), |acc, &a| acc + a * a).sqrt();
    let (nx, ny) = (norm(x), norm(y));
    if !(nx > T::zero() && ny > T::zero()) {
        return Err(UnmixError::ZeroVector);
    }
    let (mut diff, mut sum) = (T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (u, v) = (a / nx, b / ny);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Ok(T::lit(2.0) * diff.sqrt().atan2(sum.sqrt()))
}

/// Spectral angle distance between a true and an estimated signature.
pub fn sad<T: Scalar>(m: &[T], m_hat: &[T]) -> Result<T> {
    angle(m, m_hat)
}

/// Abundance angle distance between a true and an estimated abundance vector.
pub fn aad<T: Scalar>(a: &[T], a_hat: &[T]) -> Result<T> {
    angle(a, a_hat)
}

fn row_angle<T: Scalar>(x: ArrayView1<'_, T>, y: ArrayView1<'_, T>) -> Result<T> {
    angle(&x.to_vec(), &y.to_vec())
}

pub fn rms<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let sum: T = values.iter().map(|&v| v * v).sum();
    (sum / T::lit(values.len() as f64)).sqrt()
}

fn check_perm(perm: &[usize], p: usize) -> Result<()> {
    let mut seen = vec![false; p];
    if perm.len() != p {
        return Err(UnmixError::dims(format!("permutation of length {} for {p} endmembers", perm.len())));
    }
    for &i in perm {
        if i >= p || std::mem::replace(&mut seen[i], true) {
            return Err(UnmixError::InvalidValue(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Advances `perm` to the next lexicographic permutation; false after the last.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Optimal alignment of estimated to true endmembers.
///
/// Returns `perm` with `perm[i]` the estimated row matched to true row `i`,
/// minimizing `Σᵢ SAD(E_true[i], E_est[perm[i]])` over all `P!` orderings.
/// Ties keep the lexicographically first ordering.
pub fn match_endmembers<T: Scalar>(
    e_true: &EndmemberMatrix<T>,
    e_est: &EndmemberMatrix<T>,
) -> Result<Vec<usize>> {
    let p = e_true.count();
    if e_est.count() != p {
        return Err(UnmixError::RankMismatch {
            truth: p,
            estimate: e_est.count(),
        });
    }
    if e_true.bands() != e_est.bands() {
        return Err(UnmixError::dims(format!(
            "true signatures have {} bands, estimates {}",
            e_true.bands(),
            e_est.bands()
        )));
    }
    if p > MAX_EXHAUSTIVE_ENDMEMBERS {
        return Err(UnmixError::TooManyEndmembers {
            got: p,
            max: MAX_EXHAUSTIVE_ENDMEMBERS,
        });
    }
    let mut cost = vec![vec![T::zero(); p]; p];
    for (i, t) in e_true.data().outer_iter().enumerate() {
        for (j, e) in e_est.data().outer_iter().enumerate() {
            cost[i][j] = row_angle(t, e)?;
        }
    }
    let mut perm: Vec<usize> = (0..p).collect();
    let mut best = perm.clone();
    let mut best_total = T::infinity();
    loop {
        let total: T = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if total < best_total {
            best_total = total;
            best.copy_from_slice(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best)
}

/// Per-endmember SADs after alignment by `perm`.
pub fn sad_per_endmember<T: Scalar>(
    e_true: &EndmemberMatrix<T>,
    e_est: &EndmemberMatrix<T>,
    perm: &[usize],
) -> Result<Vec<T>> {
    if e_est.count() != e_true.count() {
        return Err(UnmixError::RankMismatch {
            truth: e_true.count(),
            estimate: e_est.count(),
        });
    }
    check_perm(perm, e_true.count())?;
    e_true
        .data()
        .outer_iter()
        .zip(perm)
        .map(|(t, &j)| row_angle(t, e_est.data().row(j)))
        .collect()
}

/// Per-pixel AADs with estimated abundance columns reordered by `perm`.
pub fn aad_per_pixel<T: Scalar>(
    a_true: &AbundanceMatrix<T>,
    a_est: &AbundanceMatrix<T>,
    perm: &[usize],
) -> Result<Vec<T>> {
    if a_est.endmembers() != a_true.endmembers() {
        return Err(UnmixError::RankMismatch {
            truth: a_true.endmembers(),
            estimate: a_est.endmembers(),
        });
    }
    if a_est.pixels() != a_true.pixels() {
        return Err(UnmixError::dims(format!(
            "{} true pixels vs {} estimated",
            a_true.pixels(),
            a_est.pixels()
        )));
    }
    check_perm(perm, a_true.endmembers())?;
    let aligned = a_est.data().select(Axis(1), perm);
    a_true
        .data()
        .outer_iter()
        .zip(aligned.outer_iter())
        .map(|(t, e)| row_angle(t, e))
        .collect()
}

pub fn rms_sad<T: Scalar>(
    e_true: &EndmemberMatrix<T>,
    e_est: &EndmemberMatrix<T>,
    perm: &[usize],
) -> Result<T> {
    Ok(rms(&sad_per_endmember(e_true, e_est, perm)?))
}

pub fn rms_aad<T: Scalar>(
    a_true: &AbundanceMatrix<T>,
    a_est: &AbundanceMatrix<T>,
    perm: &[usize],
) -> Result<T> {
    Ok(rms(&aad_per_pixel(a_true, a_est, perm)?))
}

/// Scores for one unmixing run. Angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport<T> {
    pub per_endmember_sad: Vec<T>,
    pub per_pixel_aad: Vec<T>,
    pub rms_sad: T,
    pub rms_aad: T,
    /// `matching[i]` is the estimated endmember aligned with true endmember `i`.
    pub matching: Vec<usize>,
}

/// Matches endmembers, then scores signatures and abundances under the same
/// alignment.
pub fn evaluate<T: Scalar>(
    e_true: &EndmemberMatrix<T>,
    a_true: &AbundanceMatrix<T>,
    e_est: &EndmemberMatrix<T>,
    a_est: &AbundanceMatrix<T>,
) -> Result<MetricReport<T>> {
    let matching = match_endmembers(e_true, e_est)?;
    let per_endmember_sad = sad_per_endmember(e_true, e_est, &matching)?;
    let per_pixel_aad = aad_per_pixel(a_true, a_est, &matching)?;
    Ok(MetricReport {
        rms_sad: rms(&per_endmember_sad),
        rms_aad: rms(&per_pixel_aad),
        per_endmember_sad,
        per_pixel_aad,
        matching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn sad_examples() {
        assert_eq!(sad(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!((sad(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((sad(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!(sad::<f64>(&[1.0, 2.0], &[3.0, 6.0]).unwrap().abs() < 1e-12);
        assert!(matches!(sad(&[0.0, 0.0], &[1.0, 0.0]), Err(UnmixError::ZeroVector)));
    }

    #[test]
    fn aad_examples() {
        assert!(aad::<f64>(&[0.3, 0.7], &[0.3, 0.7]).unwrap().abs() < 1e-12);
        assert!((aad(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!(aad::<f64>(&[0.5, 0.5], &[1.0, 1.0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn identical_vectors_never_nan() {
        // the plain arccos route returns NaN or ~1e-8 for some of these
        let v = [0.1, 0.2, 0.7, 1e-3, 0.333_333_333_333_333_3];
        for scale in [1.0, 3.0, 1e-7, 7.77] {
            let w: Vec<f64> = v.iter().map(|x| x * scale).collect();
            let a = sad(&v, &w).unwrap();
            assert!(!a.is_nan());
            assert!(a < 1e-12);
        }
        let x = [0.6f64, 0.8, 0.0];
        assert!(!sad(&x, &x).unwrap().is_nan());
    }

    fn em(rows: Array2<f64>) -> EndmemberMatrix<f64> {
        EndmemberMatrix::new(rows).unwrap()
    }

    #[test]
    fn matching_examples() {
        let e = em(array![[1.0, 0.0, 0.2], [0.0, 1.0, 0.1], [0.3, 0.3, 1.0]]);
        assert_eq!(match_endmembers(&e, &e).unwrap(), vec![0, 1, 2]);
        let swapped = em(e.data().select(Axis(0), &[1, 0, 2]));
        assert_eq!(match_endmembers(&e, &swapped).unwrap(), vec![1, 0, 2]);
        let two = em(array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert!(matches!(
            match_endmembers(&e, &two),
            Err(UnmixError::RankMismatch { truth: 3, estimate: 2 })
        ));
        let big = em(Array2::from_shape_fn((11, 12), |(i, j)| if i == j { 1.0 } else { 0.1 }));
        assert!(matches!(
            match_endmembers(&big, &big),
            Err(UnmixError::TooManyEndmembers { .. })
        ));
    }

    #[test]
    fn rms_closed_forms() {
        let t = em(array![[1.0, 0.0], [0.0, 1.0]]);
        let e = em(array![[2.0, 0.0], [1.0, 0.0]]);
        let r = rms_sad(&t, &e, &[0, 1]).unwrap();
        assert!((r - PI / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((r - 1.11072).abs() < 1e-5);

        let scaled = em(array![[0.0, 5.0], [3.0, 0.0]]);
        let perm = match_endmembers(&t, &scaled).unwrap();
        assert_eq!(rms_sad(&t, &scaled, &perm).unwrap(), 0.0);

        let a = AbundanceMatrix::new(array![[0.2, 0.8], [1.0, 0.0]]).unwrap();
        assert_eq!(rms_aad(&a, &a, &[0, 1]).unwrap(), 0.0);
        let one_t = AbundanceMatrix::new(array![[1.0, 1.0]]).unwrap();
        let one_e = AbundanceMatrix::new(array![[1.0, 0.0]]).unwrap();
        let single = aad(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(rms_aad(&one_t, &one_e, &[0, 1]).unwrap(), single);

        let zero = AbundanceMatrix::new(array![[0.0, 0.0]]).unwrap();
        assert!(matches!(rms_aad(&one_t, &zero, &[0, 1]), Err(UnmixError::ZeroVector)));
        assert!(rms_aad(&one_t, &one_e, &[0, 0]).is_err());
    }

    #[test]
    fn evaluate_applies_one_alignment() {
        let e = em(array![[1.0, 0.1, 0.0], [0.0, 0.2, 1.0]]);
        let a = AbundanceMatrix::new(array![[0.9, 0.1], [0.4, 0.6]]).unwrap();
        let e_est = em(e.data().select(Axis(0), &[1, 0]).mapv(|x| 2.0 * x));
        let a_est = AbundanceMatrix::new(a.data().select(Axis(1), &[1, 0])).unwrap();
        let report = evaluate(&e, &a, &e_est, &a_est).unwrap();
        assert_eq!(report.matching, vec![1, 0]);
        assert!(report.rms_sad < 1e-12);
        assert!(report.rms_aad < 1e-12);
    }

    fn brute_force_best(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.len()])
    }

    proptest! {
        #[test]
        fn sad_scale_invariant_and_symmetric(
            x in proptest::collection::vec(0.01f64..1.0, 6),
            y in proptest::collection::vec(0.0f64..1.0, 6),
            c in 1e-3f64..1e3,
        ) {
            prop_assume!(y.iter().any(|v| *v > 0.0));
            let a = sad(&x, &y).unwrap();
            let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
            prop_assert!((a - sad(&x, &scaled).unwrap()).abs() < 1e-12);
            prop_assert!((a - sad(&y, &x).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=FRAC_PI_2 + 1e-15).contains(&a));
        }

        #[test]
        fn matching_is_optimal_bijection(
            t in proptest::collection::vec(0.01f64..1.0, 20),
            e in proptest::collection::vec(0.01f64..1.0, 20),
        ) {
            let t = em(Array2::from_shape_vec((4, 5), t).unwrap());
            let e = em(Array2::from_shape_vec((4, 5), e).unwrap());
            let perm = match_endmembers(&t, &e).unwrap();
            let mut sorted = perm.clone();
            sorted.sort();
            prop_assert_eq!(sorted, vec![0, 1, 2, 3]);
            let cost: Vec<Vec<f64>> = (0..4)
                .map(|i| (0..4).map(|j| sad(&t.data().row(i).to_vec(), &e.data().row(j).to_vec()).unwrap()).collect())
                .collect();
            let matched: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            let identity: f64 = (0..4).map(|i| cost[i][i]).sum();
            prop_assert!((matched - brute_force_best(&cost)).abs() < 1e-12);
            prop_assert!(matched <= identity + 1e-12);
        }

        #[test]
        fn rms_matches_two_pass_oracle(vals in proptest::collection::vec(0.0f64..1.5, 1..30)) {
            let mut acc = 0.0;
            for v in &vals {
                acc += v * v;
            }
            let oracle = (acc / vals.len() as f64).sqrt();
            prop_assert!((rms(&vals) - oracle).abs() < 1e-12);
        }
    }
}
