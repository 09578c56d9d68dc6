//! Synthetic mixed-pixel scenes with known abundances.
//!
//! A labelled high-resolution map is painted with library signatures, blurred
//! and downsampled so that pixels straddling class boundaries become mixtures,
//! then corrupted with Gaussian noise and optional outlier spectra. With the
//! block-mean filter and no noise the result is exactly `X = A·E`.

use std::collections::BTreeMap;

use ndarray::{s, Array2, Array3, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UnmixError};
use crate::model::{
    check_wavelengths, flatten_cube, AbundanceMatrix, EndmemberMatrix, HyperspectralCube,
    ModelDims, ObservationMatrix,
};
use crate::scalar::Scalar;

/// Upper bound accepted for library reflectances.
pub const MAX_REFLECTANCE: f64 = 1.5;

/// Per-pixel class labels; `0` marks unlabeled background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthMap {
    labels: Array2<u32>,
}

impl GroundTruthMap {
    pub fn new(labels: Array2<u32>) -> Result<Self> {
        if labels.is_empty() {
            return Err(UnmixError::dims("groundtruth map is empty"));
        }
        if labels.iter().all(|&l| l == 0) {
            return Err(UnmixError::InvalidValue(
                "groundtruth map has no labelled pixel".into(),
            ));
        }
        Ok(Self { labels })
    }

    pub fn rows(&self) -> usize {
        self.labels.nrows()
    }

    pub fn cols(&self) -> usize {
        self.labels.ncols()
    }

    pub fn labels(&self) -> &Array2<u32> {
        &self.labels
    }

    /// Number of classes `C`, the largest label present.
    pub fn classes(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }
}

/// Named reflectance signatures sampled on a common wavelength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLibrary<T> {
    wavelengths: Vec<f64>,
    names: Vec<String>,
    /// One signature per row.
    signatures: Array2<T>,
}

impl<T: Scalar> SpectralLibrary<T> {
    pub fn new(wavelengths: Vec<f64>, names: Vec<String>, signatures: Array2<T>) -> Result<Self> {
        if wavelengths.is_empty() {
            return Err(UnmixError::dims("library has no wavelengths"));
        }
        check_wavelengths(&wavelengths)?;
        if signatures.dim() != (names.len(), wavelengths.len()) {
            return Err(UnmixError::dims(format!(
                "{} names and {} wavelengths but signature table is {:?}",
                names.len(),
                wavelengths.len(),
                signatures.dim()
            )));
        }
        for (name, row) in names.iter().zip(signatures.outer_iter()) {
            if let Some(v) = row
                .iter()
                .find(|v| !(v.is_finite() && **v >= T::zero() && v.as_f64() <= MAX_REFLECTANCE))
            {
                return Err(UnmixError::InvalidValue(format!(
                    "signature '{name}' has reflectance {v} outside [0, {MAX_REFLECTANCE}]"
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(UnmixError::InvalidValue(format!("duplicate signature name '{dup}'")));
        }
        Ok(Self {
            wavelengths,
            names,
            signatures,
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn signatures(&self) -> &Array2<T> {
        &self.signatures
    }

    pub fn bands(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn signature(&self, name: &str) -> Option<ndarray::ArrayView1<'_, T>> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.signatures.row(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialFilter {
    /// Mean over each `d × d` block.
    BlockMean,
    /// Truncated Gaussian blur (radius `⌈3σ⌉`, reflected edges) before block
    /// averaging.
    Gaussian { sigma: f64 },
}

/// Everything needed to reproduce one synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub gt: GroundTruthMap,
    pub class_to_signature: BTreeMap<u32, String>,
    pub downsample_factor: usize,
    pub filter: SpatialFilter,
    /// `None` disables Gaussian noise.
    pub snr_db: Option<f64>,
    pub outlier_fraction: f64,
    /// Outlier spectra are uniform on `[0, outlier_magnitude · max(signal)]`.
    pub outlier_magnitude: f64,
    pub seed: u64,
}

impl SceneSpec {
    pub const DEFAULT_OUTLIER_FRACTION: f64 = 0.02;
    pub const DEFAULT_OUTLIER_MAGNITUDE: f64 = 1.5;

    pub fn new(gt: GroundTruthMap, class_to_signature: BTreeMap<u32, String>) -> Self {
        Self {
            gt,
            class_to_signature,
            downsample_factor: 1,
            filter: SpatialFilter::BlockMean,
            snr_db: None,
            outlier_fraction: Self::DEFAULT_OUTLIER_FRACTION,
            outlier_magnitude: Self::DEFAULT_OUTLIER_MAGNITUDE,
            seed: 0,
        }
    }

    pub fn validate<T: Scalar>(&self, library: &SpectralLibrary<T>) -> Result<()> {
        let d = self.downsample_factor;
        if d == 0 || self.gt.rows() % d != 0 || self.gt.cols() % d != 0 {
            return Err(UnmixError::IndivisibleDims {
                rows: self.gt.rows(),
                cols: self.gt.cols(),
                factor: d,
            });
        }
        for label in 1..=self.gt.classes() {
            let name = self
                .class_to_signature
                .get(&label)
                .ok_or(UnmixError::UnmappedLabel(label))?;
            if library.signature(name).is_none() {
                return Err(UnmixError::UnknownSignature(name.clone()));
            }
        }
        if let SpatialFilter::Gaussian { sigma } = self.filter {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(UnmixError::InvalidConfig("gaussian sigma must be positive".into()));
            }
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(UnmixError::InvalidConfig("snr_db must be finite".into()));
            }
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(UnmixError::InvalidConfig("outlier fraction must lie in [0, 1)".into()));
        }
        if !(self.outlier_magnitude > 0.0 && self.outlier_magnitude.is_finite()) {
            return Err(UnmixError::InvalidConfig("outlier magnitude must be positive".into()));
        }
        Ok(())
    }
}

/// A synthetic scene with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset<T> {
    pub x: ObservationMatrix<T>,
    pub a_true: AbundanceMatrix<T>,
    pub e_true: EndmemberMatrix<T>,
    pub dims: ModelDims,
    /// Low-resolution raster shape of `x`.
    pub rows: usize,
    pub cols: usize,
    pub wavelengths: Vec<f64>,
    pub provenance: SceneSpec,
}

impl<T: Scalar> SimulatedDataset<T> {
    pub fn cube(&self) -> Result<HyperspectralCube<T>> {
        crate::model::unflatten(&self.x, self.rows, self.cols, self.wavelengths.clone())
    }
}

/// Paints each labelled pixel with its class signature; label `0` stays zero.
pub fn substitute_spectra<T: Scalar>(
    gt: &GroundTruthMap,
    library: &SpectralLibrary<T>,
    class_to_signature: &BTreeMap<u32, String>,
) -> Result<HyperspectralCube<T>> {
    let mut lookup = BTreeMap::new();
    for &label in gt.labels().iter().filter(|&&l| l > 0) {
        if lookup.contains_key(&label) {
            continue;
        }
        let name = class_to_signature
            .get(&label)
            .ok_or(UnmixError::UnmappedLabel(label))?;
        let sig = library
            .signature(name)
            .ok_or_else(|| UnmixError::UnknownSignature(name.clone()))?;
        lookup.insert(label, sig);
    }
    let bands = library.bands();
    let mut values = Array3::<T>::zeros((gt.rows(), gt.cols(), bands));
    for ((r, c), &label) in gt.labels().indexed_iter() {
        if let Some(sig) = lookup.get(&label) {
            values.slice_mut(s![r, c, ..]).assign(sig);
        }
    }
    HyperspectralCube::new(values, library.wavelengths().to_vec())
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn blur<T: Scalar>(values: &Array3<T>, sigma: f64) -> Array3<T> {
    let kernel: Vec<T> = gaussian_kernel(sigma).into_iter().map(T::lit).collect();
    let radius = (kernel.len() / 2) as isize;
    let (rows, cols, bands) = values.dim();
    let mut horiz = Array3::<T>::zeros((rows, cols, bands));
    for r in 0..rows {
        for c in 0..cols {
            for (k, &wk) in kernel.iter().enumerate() {
                let src = reflect(c as isize + k as isize - radius, cols);
                for b in 0..bands {
                    horiz[[r, c, b]] += wk * values[[r, src, b]];
                }
            }
        }
    }
    let mut out = Array3::<T>::zeros((rows, cols, bands));
    for r in 0..rows {
        for (k, &wk) in kernel.iter().enumerate() {
            let src = reflect(r as isize + k as isize - radius, rows);
            for c in 0..cols {
                for b in 0..bands {
                    out[[r, c, b]] += wk * horiz[[src, c, b]];
                }
            }
        }
    }
    out
}

/// Optional blur followed by `d × d` block averaging.
pub fn spatial_degrade<T: Scalar>(
    cube: &HyperspectralCube<T>,
    filter: SpatialFilter,
    d: usize,
) -> Result<HyperspectralCube<T>> {
    let (rows, cols, bands) = cube.values().dim();
    if d == 0 || rows % d != 0 || cols % d != 0 {
        return Err(UnmixError::IndivisibleDims { rows, cols, factor: d });
    }
    let filtered;
    let source = match filter {
        SpatialFilter::BlockMean => cube.values(),
        SpatialFilter::Gaussian { sigma } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(UnmixError::InvalidConfig("gaussian sigma must be positive".into()));
            }
            filtered = blur(cube.values(), sigma);
            &filtered
        }
    };
    let inv = T::one() / T::lit((d * d) as f64);
    let out = Array3::from_shape_fn((rows / d, cols / d, bands), |(r, c, b)| {
        let block = source.slice(s![r * d..(r + 1) * d, c * d..(c + 1) * d, b]);
        block.iter().fold(T::zero(), |acc, &v| acc + v) * inv
    });
    HyperspectralCube::new(out, cube.wavelengths().to_vec())
}

/// Fraction of each `d × d` block covered by labels `1..=classes`, with
/// unlabeled pixels left out of the denominator.
pub fn true_abundances<T: Scalar>(
    gt: &GroundTruthMap,
    d: usize,
    classes: u32,
) -> Result<AbundanceMatrix<T>> {
    let (rows, cols) = (gt.rows(), gt.cols());
    if d == 0 || rows % d != 0 || cols % d != 0 {
        return Err(UnmixError::IndivisibleDims { rows, cols, factor: d });
    }
    if classes == 0 {
        return Err(UnmixError::InvalidValue("at least one class required".into()));
    }
    let (lr, lc) = (rows / d, cols / d);
    let mut out = Array2::<T>::zeros((lr * lc, classes as usize));
    for r in 0..lr {
        for c in 0..lc {
            let block = gt.labels().slice(s![r * d..(r + 1) * d, c * d..(c + 1) * d]);
            let mut counts = vec![0usize; classes as usize];
            for &label in block.iter() {
                if label > classes {
                    return Err(UnmixError::InvalidValue(format!(
                        "label {label} exceeds class count {classes}"
                    )));
                }
                if label > 0 {
                    counts[label as usize - 1] += 1;
                }
            }
            let total: usize = counts.iter().sum();
            if total == 0 {
                return Err(UnmixError::EmptyBlock { row: r, col: c });
            }
            for (k, &n) in counts.iter().enumerate() {
                out[[r * lc + c, k]] = T::lit(n as f64 / total as f64);
            }
        }
    }
    AbundanceMatrix::with_sum_to_one(out)
}

/// Gaussian noise at the requested SNR, then whole-spectrum outliers, then
/// clamping at zero.
///
/// Noise draws come from stream 0 of the seeded generator and outlier draws
/// from stream 1, so enabling outliers leaves the noise realization intact.
pub fn add_noise<T: Scalar>(
    cube: &HyperspectralCube<T>,
    snr_db: Option<f64>,
    outlier_fraction: f64,
    outlier_magnitude: f64,
    seed: u64,
) -> Result<HyperspectralCube<T>> {
    if !(0.0..1.0).contains(&outlier_fraction) {
        return Err(UnmixError::InvalidConfig("outlier fraction must lie in [0, 1)".into()));
    }
    let input = cube.values();
    let mut values = input.clone();
    if let Some(snr) = snr_db {
        let power = input.iter().map(|v| v.as_f64().powi(2)).sum::<f64>() / input.len() as f64;
        let sigma = (power / 10f64.powf(snr / 10.0)).sqrt();
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| UnmixError::InvalidConfig(format!("noise level: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        for v in values.iter_mut() {
            *v += T::lit(normal.sample(&mut rng));
        }
    }
    let pixels = cube.rows() * cube.cols();
    let n_outliers = (outlier_fraction * pixels as f64).floor() as usize;
    if n_outliers > 0 {
        let peak = input.iter().fold(0.0f64, |m, v| m.max(v.as_f64()));
        let hi = outlier_magnitude * peak;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut picks = rand::seq::index::sample(&mut rng, pixels, n_outliers).into_vec();
        picks.sort_unstable();
        for idx in picks {
            let (r, c) = (idx / cube.cols(), idx % cube.cols());
            for v in values.slice_mut(s![r, c, ..]).iter_mut() {
                *v = T::lit(rng.random::<f64>() * hi);
            }
        }
    }
    values.mapv_inplace(|v| v.max(T::zero()));
    HyperspectralCube::new(values, cube.wavelengths().to_vec())
}

/// Substitute, degrade, compute abundances, add noise.
pub fn generate<T: Scalar>(
    spec: &SceneSpec,
    library: &SpectralLibrary<T>,
) -> Result<SimulatedDataset<T>> {
    spec.validate(library)?;
    let classes = spec.gt.classes();
    let d = spec.downsample_factor;

    let fine = substitute_spectra(&spec.gt, library, &spec.class_to_signature)?;
    let coarse = spatial_degrade(&fine, spec.filter, d)?;
    let a_true = true_abundances::<T>(&spec.gt, d, classes)?;
    let noisy = add_noise(
        &coarse,
        spec.snr_db,
        spec.outlier_fraction,
        spec.outlier_magnitude,
        spec.seed,
    )?;

    let names: Vec<String> = (1..=classes)
        .map(|k| spec.class_to_signature[&k].clone())
        .collect();
    let rows: Vec<_> = names
        .iter()
        .map(|n| library.signature(n).expect("validated").to_owned())
        .collect();
    let views: Vec<_> = rows.iter().map(|r| r.view().insert_axis(Axis(0))).collect();
    let e = ndarray::concatenate(Axis(0), &views).map_err(|e| UnmixError::dims(e.to_string()))?;
    let e_true = EndmemberMatrix::new(e)?.with_names(names)?;

    let x = flatten_cube(&noisy);
    let dims = ModelDims::new(x.pixels(), x.bands(), classes as usize)?;
    Ok(SimulatedDataset {
        x,
        a_true,
        e_true,
        dims,
        rows: noisy.rows(),
        cols: noisy.cols(),
        wavelengths: noisy.wavelengths().to_vec(),
        provenance: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reconstruct;
    use ndarray::array;

    fn library() -> SpectralLibrary<f64> {
        SpectralLibrary::new(
            vec![400.0, 500.0, 600.0],
            vec!["grass".into(), "soil".into(), "water".into()],
            array![[0.05, 0.4, 0.3], [0.2, 0.25, 0.35], [0.1, 0.05, 0.01]],
        )
        .unwrap()
    }

    fn mapping() -> BTreeMap<u32, String> {
        [(1, "grass"), (2, "soil"), (3, "water")]
            .into_iter()
            .map(|(k, v)| (k, v.to_string()))
            .collect()
    }

    fn random_map(seed: u64, rows: usize, cols: usize, classes: u32) -> GroundTruthMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GroundTruthMap::new(Array2::from_shape_simple_fn((rows, cols), || {
            rng.random_range(1..=classes)
        }))
        .unwrap()
    }

    #[test]
    fn substitution_examples() {
        let lib = library();
        let gt = GroundTruthMap::new(array![[1]]).unwrap();
        let cube = substitute_spectra(&gt, &lib, &mapping()).unwrap();
        assert_eq!(cube.spectrum(0, 0), vec![0.05, 0.4, 0.3]);

        let gt = GroundTruthMap::new(array![[1], [0]]).unwrap();
        let cube = substitute_spectra(&gt, &lib, &mapping()).unwrap();
        assert_eq!(cube.spectrum(1, 0), vec![0.0; 3]);

        let gt = random_map(1, 10, 10, 3);
        let cube = substitute_spectra(&gt, &lib, &mapping()).unwrap();
        for ((r, c), &label) in gt.labels().indexed_iter() {
            let name = &mapping()[&label];
            assert_eq!(cube.spectrum(r, c), lib.signature(name).unwrap().to_vec());
        }
    }

    #[test]
    fn substitution_errors() {
        let lib = library();
        let gt = GroundTruthMap::new(array![[4]]).unwrap();
        assert!(matches!(
            substitute_spectra(&gt, &lib, &mapping()),
            Err(UnmixError::UnmappedLabel(4))
        ));
        let mut map = mapping();
        map.insert(1, "basalt".into());
        let gt = GroundTruthMap::new(array![[1]]).unwrap();
        assert!(matches!(
            substitute_spectra(&gt, &lib, &map),
            Err(UnmixError::UnknownSignature(n)) if n == "basalt"
        ));
    }

    fn cube_of(values: Array3<f64>) -> HyperspectralCube<f64> {
        let bands = values.dim().2;
        HyperspectralCube::new(values, (0..bands).map(|b| 400.0 + b as f64).collect()).unwrap()
    }

    #[test]
    fn degrade_constant_and_checkerboard() {
        let constant = cube_of(Array3::from_elem((6, 6, 2), 0.37));
        for filter in [SpatialFilter::BlockMean, SpatialFilter::Gaussian { sigma: 1.2 }] {
            for d in [1, 2, 3] {
                let out = spatial_degrade(&constant, filter, d).unwrap();
                assert_eq!(out.values().dim(), (6 / d, 6 / d, 2));
                assert!(out.values().iter().all(|v| (v - 0.37).abs() < 1e-12));
            }
        }
        let board = cube_of(array![[[0.0], [1.0]], [[1.0], [0.0]]]);
        let out = spatial_degrade(&board, SpatialFilter::BlockMean, 2).unwrap();
        assert_eq!(out.values()[[0, 0, 0]], 0.5);
        assert!(matches!(
            spatial_degrade(&constant, SpatialFilter::BlockMean, 4),
            Err(UnmixError::IndivisibleDims { .. })
        ));
    }

    #[test]
    fn block_mean_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cube = cube_of(Array3::from_shape_simple_fn((8, 8, 3), || rng.random::<f64>()));
        let out = spatial_degrade(&cube, SpatialFilter::BlockMean, 4).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                for b in 0..3 {
                    let mut sum = 0.0;
                    for i in 0..4 {
                        for j in 0..4 {
                            sum += cube.values()[[4 * r + i, 4 * c + j, b]];
                        }
                    }
                    assert!((out.values()[[r, c, b]] - sum / 16.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gaussian_blur_preserves_mass_and_smooths() {
        let mut values = Array3::<f64>::zeros((9, 9, 1));
        values[[4, 4, 0]] = 1.0;
        let blurred = blur(&values, 1.0);
        assert!((blurred.sum() - 1.0).abs() < 1e-12);
        assert!(blurred[[4, 4, 0]] < 1.0 && blurred[[4, 5, 0]] > 0.0);
        assert_eq!(blurred[[4, 3, 0]], blurred[[4, 5, 0]]);
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(-7, 3), 0);
    }

    #[test]
    fn abundance_examples() {
        let gt = GroundTruthMap::new(array![[1, 1], [1, 2]]).unwrap();
        let a = true_abundances::<f64>(&gt, 2, 2).unwrap();
        assert_eq!(a.data(), &array![[0.75, 0.25]]);

        let gt = GroundTruthMap::new(Array2::from_elem((4, 4), 2)).unwrap();
        let a = true_abundances::<f64>(&gt, 2, 3).unwrap();
        assert!(a.data().outer_iter().all(|r| r.to_vec() == vec![0.0, 1.0, 0.0]));

        let gt = GroundTruthMap::new(array![[0, 0, 1, 1], [0, 0, 1, 0]]).unwrap();
        assert!(matches!(
            true_abundances::<f64>(&gt, 2, 1),
            Err(UnmixError::EmptyBlock { row: 0, col: 0 })
        ));
        // unlabeled pixels are left out of the denominator
        let gt = GroundTruthMap::new(array![[1, 0], [2, 2]]).unwrap();
        let a = true_abundances::<f64>(&gt, 2, 2).unwrap();
        assert!((a.data()[[0, 0]] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn abundances_match_counting_oracle() {
        let gt = random_map(9, 12, 12, 4);
        let a = true_abundances::<f64>(&gt, 3, 4).unwrap();
        for br in 0..4 {
            for bc in 0..4 {
                let mut counts = [0.0; 4];
                for i in 0..3 {
                    for j in 0..3 {
                        counts[(gt.labels()[[3 * br + i, 3 * bc + j]] - 1) as usize] += 1.0;
                    }
                }
                for k in 0..4 {
                    assert_eq!(a.data()[[br * 4 + bc, k]], counts[k] / 9.0);
                }
            }
        }
    }

    #[test]
    fn noise_free_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cube = cube_of(Array3::from_shape_simple_fn((3, 3, 4), || rng.random::<f64>()));
        assert_eq!(add_noise(&cube, None, 0.0, 1.5, 7).unwrap(), cube);
    }

    #[test]
    fn measured_snr_close_to_target() {
        let cube = cube_of(Array3::from_elem((64, 64, 10), 0.5));
        let noisy = add_noise(&cube, Some(20.0), 0.0, 1.5, 3).unwrap();
        let noise_power = (noisy.values() - cube.values()).mapv(|v| v * v).mean().unwrap();
        let signal_power = 0.25;
        let snr = 10.0 * (signal_power / noise_power).log10();
        assert!((snr - 20.0).abs() < 0.5, "measured {snr} dB");
    }

    #[test]
    fn outliers_touch_exact_pixel_count() {
        let cube = cube_of(Array3::from_elem((10, 10, 5), 0.3));
        let base = add_noise(&cube, Some(30.0), 0.0, 1.5, 11).unwrap();
        let with = add_noise(&cube, Some(30.0), 0.02, 1.5, 11).unwrap();
        let mut differing = 0;
        for r in 0..10 {
            for c in 0..10 {
                if base.spectrum(r, c) != with.spectrum(r, c) {
                    differing += 1;
                    assert!(with.spectrum(r, c).iter().all(|v| (0.0..=0.45).contains(v)));
                }
            }
        }
        assert_eq!(differing, 2);
    }

    fn spec(gt: GroundTruthMap, d: usize) -> SceneSpec {
        let mut s = SceneSpec::new(gt, mapping());
        s.downsample_factor = d;
        s.outlier_fraction = 0.0;
        s
    }

    #[test]
    fn noiseless_generate_is_exact_mixture() {
        for (seed, d) in [(1, 1), (2, 2), (3, 3)] {
            let ds = generate(&spec(random_map(seed, 12, 12, 3), d), &library()).unwrap();
            let x = reconstruct(&ds.a_true, &ds.e_true).unwrap();
            for (a, b) in ds.x.data().iter().zip(x.data().iter()) {
                assert!((a - b).abs() < 1e-9);
            }
            assert_eq!(ds.dims, ModelDims::new(144 / (d * d), 3, 3).unwrap());
            if d == 1 {
                assert!(ds
                    .a_true
                    .data()
                    .outer_iter()
                    .all(|r| r.iter().filter(|v| **v == 1.0).count() == 1));
            }
        }
    }

    #[test]
    fn generate_deterministic() {
        let mut s = spec(random_map(5, 8, 8, 3), 2);
        s.snr_db = Some(25.0);
        s.outlier_fraction = 0.1;
        s.seed = 77;
        let a = generate(&s, &library()).unwrap();
        let b = generate(&s, &library()).unwrap();
        assert_eq!(a, b);
        s.seed = 78;
        assert_ne!(generate(&s, &library()).unwrap().x, a.x);
    }

    #[test]
    fn lower_snr_means_larger_residual() {
        let residual = |snr: f64, seed: u64| {
            let mut s = spec(random_map(3, 12, 12, 3), 2);
            s.snr_db = Some(snr);
            s.seed = seed;
            let ds = generate(&s, &library()).unwrap();
            let clean = reconstruct(&ds.a_true, &ds.e_true).unwrap();
            (ds.x.data() - clean.data()).mapv(|v| v * v).sum().sqrt()
        };
        let median = |snr: f64| {
            let mut v: Vec<f64> = (0..10).map(|s| residual(snr, s)).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (v[4] + v[5]) / 2.0
        };
        assert!(median(15.0) > median(35.0));
    }
}
