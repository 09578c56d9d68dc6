//! Hyperspectral unmixing under the linear mixture model.
//!
//! An observation matrix `X` (pixels × bands) is factored into abundances
//! `A` (pixels × endmembers) and endmember signatures `E` (endmembers × bands)
//! with either the classic multiplicative-update NMF on the squared Euclidean
//! cost, or the robust NMF that descends the hypersurface cost
//! `½(√(1 + ‖X − AE‖²) − 1)` with projected Armijo line searches.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases below name the concrete instantiations. The CLI and
//! the file formats work in `f64` in memory and `f32` on disk for cubes.
//!
//! ```
//! use ndarray::array;
//! use unmix::{metrics, ObservationsF64};
//!
//! let x = ObservationsF64::new(array![[0.1, 0.2, 0.3]]).unwrap();
//! assert_eq!(x.pixels(), 1);
//! let angle = metrics::sad(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
//! assert!((angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
//! ```

pub mod cli;
pub mod costs;
pub mod error;
pub mod io;
mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod simulate;
pub mod solvers;

pub use error::{Result, UnmixError};
pub use model::{AbundanceMatrix, EndmemberMatrix, HyperspectralCube, ModelDims, ObservationMatrix};
pub use scalar::Scalar;
pub use solvers::{FactorizationResult, SolverConfig};

pub type CubeF64 = HyperspectralCube<f64>;
pub type CubeF32 = HyperspectralCube<f32>;
pub type ObservationsF64 = ObservationMatrix<f64>;
pub type ObservationsF32 = ObservationMatrix<f32>;
pub type EndmembersF64 = EndmemberMatrix<f64>;
pub type EndmembersF32 = EndmemberMatrix<f32>;
pub type AbundancesF64 = AbundanceMatrix<f64>;
pub type AbundancesF32 = AbundanceMatrix<f32>;
pub type FactorizationF64 = FactorizationResult<f64>;
pub type FactorizationF32 = FactorizationResult<f32>;
