//! File formats.
//!
//! | data | format |
//! |------|--------|
//! | cube | `<name>.hdr` key:value text header + `<name>.raw` float32 little-endian BSQ |
//! | spectral library | CSV, header `wavelength_nm,<name>,...`, one row per band |
//! | groundtruth map | CSV of non-negative integer labels, one row per raster row |
//! | matrices (A, E, X) | CSV, shortest round-trip decimal representation |
//! | metric report | JSON document, angles in degrees |
//!
//! Every reader has a byte-level `parse_*` counterpart that never panics on
//! malformed input.

mod cube;
mod groundtruth;
mod library;
mod matrix;
mod report;

use std::fs;
use std::path::Path;

use crate::error::{Result, UnmixError};

pub use cube::{cube_paths, encode_cube, parse_cube, read_cube, write_cube, CubeHeader};
pub use groundtruth::{parse_groundtruth, read_groundtruth, write_groundtruth};
pub use library::{parse_library, read_library, write_library};
pub use matrix::{format_matrix_csv, parse_matrix_csv, read_matrix_csv, write_matrix_csv};
pub use report::{
    parse_report, parse_run_metadata, read_report, read_run_metadata, to_json_pretty, write_report,
    write_run_metadata, ReportDocument, RunMetadata,
};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| UnmixError::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| UnmixError::io(path, e))
}

pub(crate) fn parse_err(msg: impl std::fmt::Display) -> UnmixError {
    UnmixError::Parse(msg.to_string())
}
