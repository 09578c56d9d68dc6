use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_err, read_bytes, write_bytes};
use crate::error::Result;
use crate::metrics::MetricReport;
use crate::scalar::Scalar;
use crate::solvers::{Algorithm, SolverConfig, Termination};

/// Outcome of one solver run, as recorded next to its estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMetadata {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub iterations: usize,
    pub termination: Termination,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub config: SolverConfig,
}

/// JSON form of a [`MetricReport`]; every angle is in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub algorithm: Option<Algorithm>,
    pub rms_sad_deg: f64,
    pub rms_aad_deg: f64,
    pub iterations: Option<usize>,
    pub termination: Option<Termination>,
    pub seed: Option<u64>,
    pub config: Option<SolverConfig>,
    pub per_endmember_sad_deg: Vec<f64>,
    pub per_pixel_aad_deg: Vec<f64>,
    /// `matching[i]` is the estimated endmember aligned with true endmember `i`.
    pub matching: Vec<usize>,
}

impl ReportDocument {
    pub fn new<T: Scalar>(report: &MetricReport<T>, run: Option<&RunMetadata>) -> Self {
        let deg = |v: &T| v.as_f64().to_degrees();
        Self {
            algorithm: run.map(|r| r.algorithm),
            rms_sad_deg: deg(&report.rms_sad),
            rms_aad_deg: deg(&report.rms_aad),
            iterations: run.map(|r| r.iterations),
            termination: run.map(|r| r.termination),
            seed: run.map(|r| r.seed),
            config: run.map(|r| r.config.clone()),
            per_endmember_sad_deg: report.per_endmember_sad.iter().map(deg).collect(),
            per_pixel_aad_deg: report.per_pixel_aad.iter().map(deg).collect(),
            matching: report.matching.clone(),
        }
    }
}

pub fn to_json_pretty<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable document");
    s.push('\n');
    s
}

pub fn write_report(doc: &ReportDocument, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), to_json_pretty(doc).as_bytes())
}

pub fn parse_report(bytes: &[u8]) -> Result<ReportDocument> {
    serde_json::from_slice(bytes).map_err(parse_err)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportDocument> {
    parse_report(&read_bytes(path.as_ref())?)
}

pub fn write_run_metadata(meta: &RunMetadata, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), to_json_pretty(meta).as_bytes())
}

pub fn parse_run_metadata(bytes: &[u8]) -> Result<RunMetadata> {
    serde_json::from_slice(bytes).map_err(parse_err)
}

pub fn read_run_metadata(path: impl AsRef<Path>) -> Result<RunMetadata> {
    parse_run_metadata(&read_bytes(path.as_ref())?)
}
