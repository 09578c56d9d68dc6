use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use super::{AlgoArg, AscArg, FilterArg, InitArg, SolverArgs};
use crate::error::{Result, UnmixError};
use crate::io;
use crate::solvers::{Algorithm, AscMode, InitStrategy, SolverConfig};

/// Flat TOML defaults for every subcommand. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gt: Option<PathBuf>,
    pub library: Option<PathBuf>,
    pub map: Option<String>,
    pub factor: Option<usize>,
    pub filter: Option<String>,
    pub sigma: Option<f64>,
    pub snr_db: Option<f64>,
    pub outlier_frac: Option<f64>,
    pub outlier_mag: Option<f64>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub algo: Option<String>,
    pub endmembers: Option<usize>,
    pub max_iter: Option<usize>,
    pub rel_tol: Option<f64>,
    pub asc: Option<String>,
    pub delta: Option<f64>,
    pub init: Option<String>,
    pub epsilon: Option<f64>,
    pub initial_step: Option<f64>,
    pub shrink: Option<f64>,
    pub sufficient_decrease: Option<f64>,
    pub max_backtracks: Option<usize>,
    pub est: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub seeds: Option<String>,
    pub trace: Option<PathBuf>,
    pub abundance: Option<PathBuf>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| UnmixError::InvalidConfig(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = io::read_bytes(path)?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| UnmixError::InvalidConfig(format!("{} is not UTF-8", path.display())))?;
        Self::parse(text)
    }

    pub(crate) fn algo(&self) -> Result<Option<AlgoArg>> {
        enum_key(&self.algo, "algo")
    }

    pub(crate) fn filter(&self) -> Result<Option<FilterArg>> {
        enum_key(&self.filter, "filter")
    }

    fn asc(&self) -> Result<Option<AscArg>> {
        enum_key(&self.asc, "asc")
    }

    fn init(&self) -> Result<Option<InitArg>> {
        enum_key(&self.init, "init")
    }
}

fn enum_key<E: ValueEnum>(value: &Option<String>, key: &str) -> Result<Option<E>> {
    value
        .as_deref()
        .map(|s| {
            E::from_str(s, true).map_err(|_| UnmixError::InvalidConfig(format!("bad value '{s}' for {key}")))
        })
        .transpose()
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Nmf => Algorithm::Nmf,
            AlgoArg::Rnmf => Algorithm::Rnmf,
        }
    }
}

/// Layers flags over the config file over library defaults.
pub(crate) fn solver_config(
    algorithm: Algorithm,
    seed: u64,
    args: &SolverArgs,
    file: &RunConfig,
) -> Result<SolverConfig> {
    let endmembers = super::require(&args.endmembers, &file.endmembers, "endmembers")?;
    let mut config = SolverConfig::new(algorithm, endmembers);
    config.seed = seed;
    if let Some(n) = args.max_iter.or(file.max_iter) {
        config.max_iter = n;
    }
    if let Some(t) = args.rel_tol.or(file.rel_tol) {
        config.rel_tol = t;
    }
    if let Some(e) = args.epsilon.or(file.epsilon) {
        config.epsilon = e;
    }
    let delta = args.delta.or(file.delta).unwrap_or(SolverConfig::DEFAULT_AUGMENTATION_DELTA);
    if let Some(asc) = args.asc.or(file.asc()?) {
        config.asc = match asc {
            AscArg::None => AscMode::None,
            AscArg::Rownorm => AscMode::RowNormalize,
            AscArg::Augment => AscMode::Augmentation { delta },
        };
    }
    if let Some(init) = args.init.or(file.init()?) {
        config.init = match init {
            InitArg::Random => InitStrategy::RandomUniform,
            InitArg::Sampled => InitStrategy::DataSampled,
        };
    }
    if let Some(s) = args.initial_step.or(file.initial_step) {
        config.armijo.initial_step = s;
    }
    if let Some(s) = args.shrink.or(file.shrink) {
        config.armijo.shrink = s;
    }
    if let Some(c) = args.sufficient_decrease.or(file.sufficient_decrease) {
        config.armijo.sufficient_decrease = c;
    }
    if let Some(k) = args.max_backtracks.or(file.max_backtracks) {
        config.armijo.max_backtracks = k;
    }
    config.validate()?;
    Ok(config)
}
