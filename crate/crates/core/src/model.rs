//! Linear mixture model types: `X = A·E + N`.
//!
//! Pixels are linearized row-major, so pixel `(r, c)` of a cube becomes row
//! `r * cols + c` of the observation matrix.

use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::error::{Result, UnmixError};
use crate::scalar::Scalar;

/// Row sums must be within this distance of one when an abundance matrix is
/// flagged as sum-to-one.
pub const ASC_TOLERANCE: f64 = 1e-6;

fn check_nonnegative<'a, T: Scalar>(
    values: impl IntoIterator<Item = &'a T>,
    what: &str,
) -> Result<()> {
    for v in values {
        if !v.is_finite() || *v < T::zero() {
            return Err(UnmixError::InvalidValue(format!(
                "{what} entries must be finite and nonnegative, found {v}"
            )));
        }
    }
    Ok(())
}

/// A `rows × cols × bands` reflectance raster with its wavelength axis.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperspectralCube<T> {
    values: Array3<T>,
    wavelengths: Vec<f64>,
}

impl<T: Scalar> HyperspectralCube<T> {
    /// `values` is indexed `[row, col, band]`.
    pub fn new(values: Array3<T>, wavelengths: Vec<f64>) -> Result<Self> {
        let (rows, cols, bands) = values.dim();
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(UnmixError::dims(format!(
                "cube must be non-empty, got {rows}x{cols}x{bands}"
            )));
        }
        if wavelengths.len() != bands {
            return Err(UnmixError::dims(format!(
                "{} wavelengths for {bands} bands",
                wavelengths.len()
            )));
        }
        check_wavelengths(&wavelengths)?;
        check_nonnegative(values.iter(), "cube")?;
        // Standard layout keeps flatten/unflatten a pure reshape.
        let values = values.as_standard_layout().into_owned();
        Ok(Self {
            values,
            wavelengths,
        })
    }

    pub fn rows(&self) -> usize {
        self.values.dim().0
    }

    pub fn cols(&self) -> usize {
        self.values.dim().1
    }

    pub fn bands(&self) -> usize {
        self.values.dim().2
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn values(&self) -> &Array3<T> {
        &self.values
    }

    /// Spectrum of pixel `(row, col)`.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<T> {
        self.values
            .index_axis(Axis(0), row)
            .index_axis(Axis(0), col)
            .to_vec()
    }
}

pub(crate) fn check_wavelengths(wavelengths: &[f64]) -> Result<()> {
    if let Some(w) = wavelengths.iter().find(|w| !w.is_finite()) {
        return Err(UnmixError::InvalidValue(format!("wavelength {w}")));
    }
    match wavelengths.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(UnmixError::NonMonotoneWavelengths(i + 1)),
        None => Ok(()),
    }
}

/// `M × L` matrix of observed spectra, one pixel per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix<T> {
    data: Array2<T>,
}

impl<T: Scalar> ObservationMatrix<T> {
    pub fn new(data: Array2<T>) -> Result<Self> {
        let (m, l) = data.dim();
        if m == 0 || l == 0 {
            return Err(UnmixError::dims(format!(
                "observation matrix must be non-empty, got {m}x{l}"
            )));
        }
        check_nonnegative(data.iter(), "observation")?;
        Ok(Self { data })
    }

    pub fn pixels(&self) -> usize {
        self.data.nrows()
    }

    pub fn bands(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<T> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_inner(self) -> Array2<T> {
        self.data
    }
}

/// `P × L` matrix of endmember signatures, one material per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EndmemberMatrix<T> {
    data: Array2<T>,
    names: Option<Vec<String>>,
}

impl<T: Scalar> EndmemberMatrix<T> {
    pub fn new(data: Array2<T>) -> Result<Self> {
        let (p, l) = data.dim();
        if p == 0 || l == 0 {
            return Err(UnmixError::dims(format!(
                "endmember matrix must be non-empty, got {p}x{l}"
            )));
        }
        check_nonnegative(data.iter(), "endmember")?;
        if let Some(k) = data
            .outer_iter()
            .position(|row| row.iter().all(|v| *v == T::zero()))
        {
            return Err(UnmixError::InvalidValue(format!(
                "endmember {k} is an all-zero signature"
            )));
        }
        Ok(Self { data, names: None })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.count() {
            return Err(UnmixError::dims(format!(
                "{} names for {} endmembers",
                names.len(),
                self.count()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn count(&self) -> usize {
        self.data.nrows()
    }

    pub fn bands(&self) -> usize {
        self.data.ncols()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn data(&self) -> &Array2<T> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_inner(self) -> Array2<T> {
        self.data
    }
}

/// `M × P` matrix of per-pixel fractions.
///
/// Nonnegativity is always enforced. The sum-to-one property is recorded by
/// whoever produced the matrix and checked when claimed.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceMatrix<T> {
    data: Array2<T>,
    sum_to_one: bool,
}

impl<T: Scalar> AbundanceMatrix<T> {
    pub fn new(data: Array2<T>) -> Result<Self> {
        let (m, p) = data.dim();
        if m == 0 || p == 0 {
            return Err(UnmixError::dims(format!(
                "abundance matrix must be non-empty, got {m}x{p}"
            )));
        }
        check_nonnegative(data.iter(), "abundance")?;
        Ok(Self {
            data,
            sum_to_one: false,
        })
    }

    /// Like [`AbundanceMatrix::new`] but also requires unit row sums.
    pub fn with_sum_to_one(data: Array2<T>) -> Result<Self> {
        let mut out = Self::new(data)?;
        for (i, row) in out.data.outer_iter().enumerate() {
            let s = row.sum().as_f64();
            if (s - 1.0).abs() > ASC_TOLERANCE {
                return Err(UnmixError::InvalidValue(format!(
                    "abundance row {i} sums to {s}, expected 1"
                )));
            }
        }
        out.sum_to_one = true;
        Ok(out)
    }

    pub fn pixels(&self) -> usize {
        self.data.nrows()
    }

    pub fn endmembers(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_sum_to_one(&self) -> bool {
        self.sum_to_one
    }

    pub fn data(&self) -> &Array2<T> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_inner(self) -> Array2<T> {
        self.data
    }
}

/// Problem sizes: `M` pixels, `L` bands, `P` endmembers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub pixels: usize,
    pub bands: usize,
    pub endmembers: usize,
}

impl ModelDims {
    pub fn new(pixels: usize, bands: usize, endmembers: usize) -> Result<Self> {
        if pixels == 0 || bands == 0 || endmembers == 0 || endmembers > pixels.min(bands) {
            return Err(UnmixError::InvalidRank {
                endmembers,
                pixels,
                bands,
            });
        }
        Ok(Self {
            pixels,
            bands,
            endmembers,
        })
    }
}

/// Reshapes a cube into an `(rows·cols) × bands` observation matrix.
pub fn flatten_cube<T: Scalar>(cube: &HyperspectralCube<T>) -> ObservationMatrix<T> {
    let (rows, cols, bands) = cube.values.dim();
    let data = cube
        .values
        .to_shape((rows * cols, bands))
        .expect("cube values are in standard layout")
        .into_owned();
    ObservationMatrix { data }
}

/// Inverse of [`flatten_cube`].
pub fn unflatten<T: Scalar>(
    x: &ObservationMatrix<T>,
    rows: usize,
    cols: usize,
    wavelengths: Vec<f64>,
) -> Result<HyperspectralCube<T>> {
    if rows * cols != x.pixels() {
        return Err(UnmixError::dims(format!(
            "{} pixels cannot fill a {rows}x{cols} raster",
            x.pixels()
        )));
    }
    if wavelengths.len() != x.bands() {
        return Err(UnmixError::dims(format!(
            "{} wavelengths for {} bands",
            wavelengths.len(),
            x.bands()
        )));
    }
    let values = x
        .data
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rows, cols, x.bands()))
        .map_err(|e| UnmixError::dims(e.to_string()))?;
    HyperspectralCube::new(values, wavelengths)
}

/// Noiseless forward model `A·E`.
pub fn reconstruct<T: Scalar>(
    a: &AbundanceMatrix<T>,
    e: &EndmemberMatrix<T>,
) -> Result<ObservationMatrix<T>> {
    if a.endmembers() != e.count() {
        return Err(UnmixError::dims(format!(
            "abundances have {} columns but there are {} endmembers",
            a.endmembers(),
            e.count()
        )));
    }
    ObservationMatrix::new(a.data.dot(&e.data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array};
    use proptest::prelude::*;

    fn cube(values: Array3<f64>) -> HyperspectralCube<f64> {
        let bands = values.dim().2;
        let wl = (0..bands).map(|b| 400.0 + 10.0 * b as f64).collect();
        HyperspectralCube::new(values, wl).unwrap()
    }

    #[test]
    fn single_pixel_flattens_to_one_row() {
        let c = cube(Array::from_shape_vec((1, 1, 3), vec![0.1, 0.2, 0.3]).unwrap());
        assert_eq!(flatten_cube(&c).data(), &array![[0.1, 0.2, 0.3]]);
    }

    #[test]
    fn flatten_is_row_major() {
        // value encodes (r, c) as 10r + c
        let c = cube(Array::from_shape_fn((2, 2, 1), |(r, c, _)| (10 * r + c) as f64));
        let x = flatten_cube(&c);
        assert_eq!(x.data().column(0).to_vec(), vec![0.0, 1.0, 10.0, 11.0]);
    }

    #[test]
    fn unflatten_examples() {
        let x = ObservationMatrix::new(array![[0.1, 0.2, 0.3]]).unwrap();
        let c = unflatten(&x, 1, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.spectrum(0, 0), vec![0.1, 0.2, 0.3]);

        let x = ObservationMatrix::new(array![[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let c = unflatten(&x, 2, 2, vec![500.0]).unwrap();
        assert_eq!(c.spectrum(1, 0), vec![2.0]);
        assert_eq!(c.spectrum(0, 1), vec![1.0]);

        let x = ObservationMatrix::new(Array2::<f64>::zeros((5, 3))).unwrap();
        assert!(matches!(
            unflatten(&x, 2, 2, vec![1.0, 2.0, 3.0]),
            Err(UnmixError::DimensionMismatch(_))
        ));
        let x = ObservationMatrix::new(Array2::<f64>::zeros((4, 3))).unwrap();
        assert!(matches!(
            unflatten(&x, 2, 2, vec![1.0, 2.0]),
            Err(UnmixError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn reconstruct_examples() {
        let a = AbundanceMatrix::new(array![[1.0]]).unwrap();
        let e = EndmemberMatrix::new(array![[0.5, 0.5]]).unwrap();
        assert_eq!(reconstruct(&a, &e).unwrap().data(), &array![[0.5, 0.5]]);

        let a = AbundanceMatrix::new(array![[0.5, 0.5]]).unwrap();
        let e = EndmemberMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(reconstruct(&a, &e).unwrap().data(), &array![[0.5, 0.5]]);

        let e = EndmemberMatrix::new(array![[1.0, 0.0]]).unwrap();
        assert!(reconstruct(&a, &e).is_err());
    }

    #[test]
    fn reconstruct_matches_triple_loop() {
        let a = array![[0.1, 0.9], [0.3, 0.7], [0.5, 0.5], [1.0, 0.0]];
        let e = array![[0.2, 0.4, 0.6], [0.9, 0.1, 0.3]];
        let mut oracle = Array2::<f64>::zeros((4, 3));
        for i in 0..4 {
            for j in 0..3 {
                for k in 0..2 {
                    oracle[[i, j]] += a[[i, k]] * e[[k, j]];
                }
            }
        }
        let got = reconstruct(
            &AbundanceMatrix::new(a).unwrap(),
            &EndmemberMatrix::new(e).unwrap(),
        )
        .unwrap();
        for (g, o) in got.data().iter().zip(oracle.iter()) {
            assert!((g - o).abs() < 1e-12);
        }
    }

    #[test]
    fn invariants_rejected() {
        assert!(ObservationMatrix::new(array![[-0.1]]).is_err());
        assert!(ObservationMatrix::new(array![[f64::NAN]]).is_err());
        assert!(EndmemberMatrix::new(array![[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(AbundanceMatrix::with_sum_to_one(array![[0.5, 0.4]]).is_err());
        assert!(AbundanceMatrix::with_sum_to_one(array![[0.5, 0.5]]).unwrap().is_sum_to_one());
        assert!(ModelDims::new(4, 4, 5).is_err());
        assert!(ModelDims::new(4, 4, 4).is_ok());
        let bad_wl = HyperspectralCube::new(Array3::<f64>::zeros((1, 1, 2)), vec![400.0, 400.0]);
        assert!(matches!(bad_wl, Err(UnmixError::NonMonotoneWavelengths(1))));
    }

    proptest! {
        #[test]
        fn flatten_unflatten_round_trip(
            rows in 1usize..5, cols in 1usize..5, bands in 1usize..6, seed in any::<u64>()
        ) {
            let mut state = seed | 1;
            let values = Array::from_shape_fn((rows, cols, bands), |_| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                (state % 10_000) as f64 / 7919.0
            });
            let c = cube(values);
            let back = unflatten(&flatten_cube(&c), rows, cols, c.wavelengths().to_vec()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn convex_combinations_stay_in_unit_interval(
            w in proptest::collection::vec(0.01f64..1.0, 6),
            e in proptest::collection::vec(0.001f64..=1.0, 12),
        ) {
            let mut a = Array2::from_shape_vec((2, 3), w).unwrap();
            for mut row in a.outer_iter_mut() {
                let s = row.sum();
                row /= s;
            }
            let e = Array2::from_shape_vec((3, 4), e).unwrap();
            let x = reconstruct(
                &AbundanceMatrix::new(a).unwrap(),
                &EndmemberMatrix::new(e).unwrap(),
            ).unwrap();
            prop_assert!(x.data().iter().all(|v| *v >= 0.0 && *v <= 1.0 + 1e-12));
        }
    }
}
