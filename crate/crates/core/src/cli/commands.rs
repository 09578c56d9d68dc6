use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::solver_config;
use super::{
    create_dir, require, AlgoArg, CompareArgs, EvaluateArgs, FilterArg, RunConfig, SimulateArgs,
    UnmixArgs, EXIT_NUMERIC, EXIT_OK,
};
use crate::error::{Result, UnmixError};
use crate::io::{self, ReportDocument, RunMetadata};
use crate::metrics::{self, MetricReport};
use crate::model::{flatten_cube, AbundanceMatrix, EndmemberMatrix, ObservationMatrix};
use crate::simulate::{self, SceneSpec, SpatialFilter};
use crate::solvers::{self, Algorithm, FactorizationResult, SolverConfig, Termination};

/// Parses `1=vegetation,2=soil`.
pub(crate) fn parse_map(text: &str) -> Result<BTreeMap<u32, String>> {
    let bad = |item: &str| UnmixError::InvalidConfig(format!("bad --map entry '{item}'"));
    let mut map = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (label, name) = item.split_once('=').ok_or_else(|| bad(item))?;
        let label: u32 = label.trim().parse().map_err(|_| bad(item))?;
        let name = name.trim();
        if label == 0 || name.is_empty() || map.insert(label, name.to_string()).is_some() {
            return Err(bad(item));
        }
    }
    Ok(map)
}

pub(crate) fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let seeds = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| UnmixError::InvalidConfig(format!("bad seed '{s}'")))
        })
        .collect::<Result<Vec<u64>>>()?;
    if seeds.is_empty() {
        return Err(UnmixError::InvalidConfig("--seeds is empty".into()));
    }
    Ok(seeds)
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    gt: &'a Path,
    library: &'a Path,
    map: &'a BTreeMap<u32, String>,
    factor: usize,
    filter: SpatialFilter,
    snr_db: Option<f64>,
    outlier_frac: f64,
    outlier_mag: f64,
    seed: u64,
    rows: usize,
    cols: usize,
    pixels: usize,
    bands: usize,
    endmembers: usize,
    endmember_names: &'a [String],
}

pub(crate) fn simulate(args: &SimulateArgs, file: &RunConfig) -> Result<i32> {
    let gt_path = require(&args.gt, &file.gt, "gt")?;
    let lib_path = require(&args.library, &file.library, "library")?;
    let map = parse_map(&require(&args.map, &file.map, "map")?)?;
    let out = require(&args.out, &file.out, "out")?;

    let gt = io::read_groundtruth(&gt_path)?;
    let library = io::read_library::<f64>(&lib_path)?;
    let mut spec = SceneSpec::new(gt, map);
    spec.downsample_factor = args.factor.or(file.factor).unwrap_or(1);
    spec.filter = match args.filter.or(file.filter()?).unwrap_or(FilterArg::BlockMean) {
        FilterArg::BlockMean => SpatialFilter::BlockMean,
        FilterArg::Gaussian => SpatialFilter::Gaussian {
            sigma: args.sigma.or(file.sigma).unwrap_or(1.0),
        },
    };
    spec.snr_db = args.snr_db.or(file.snr_db);
    if let Some(f) = args.outlier_frac.or(file.outlier_frac) {
        spec.outlier_fraction = f;
    }
    if let Some(m) = args.outlier_mag.or(file.outlier_mag) {
        spec.outlier_magnitude = m;
    }
    spec.seed = args.seed.or(file.seed).unwrap_or(0);

    let data = simulate::generate(&spec, &library)?;
    create_dir(&out)?;
    io::write_cube(&data.cube()?, out.join("X"))?;
    io::write_matrix_csv(data.a_true.data(), out.join("A_true.csv"))?;
    io::write_matrix_csv(data.e_true.data(), out.join("E_true.csv"))?;
    let provenance = Provenance {
        gt: &gt_path,
        library: &lib_path,
        map: &spec.class_to_signature,
        factor: spec.downsample_factor,
        filter: spec.filter,
        snr_db: spec.snr_db,
        outlier_frac: spec.outlier_fraction,
        outlier_mag: spec.outlier_magnitude,
        seed: spec.seed,
        rows: data.rows,
        cols: data.cols,
        pixels: data.dims.pixels,
        bands: data.dims.bands,
        endmembers: data.dims.endmembers,
        endmember_names: data.e_true.names().unwrap_or_default(),
    };
    write_json(&provenance, &out.join("provenance.json"))?;
    Ok(EXIT_OK)
}

/// Reads a cube (any of `X`, `X.hdr`, `X.raw`) or, for `.csv`, a matrix.
pub(crate) fn load_observations(path: &Path) -> Result<ObservationMatrix<f64>> {
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        ObservationMatrix::new(io::read_matrix_csv(path)?)
    } else {
        Ok(flatten_cube(&io::read_cube::<f64>(path)?))
    }
}

fn run_metadata(config: &SolverConfig, result: &FactorizationResult<f64>) -> RunMetadata {
    RunMetadata {
        algorithm: config.algorithm,
        seed: config.seed,
        iterations: result.iterations,
        termination: result.termination,
        initial_cost: result.cost_trace[0],
        final_cost: *result.cost_trace.last().expect("trace holds the initial cost"),
        config: config.clone(),
    }
}

/// A stalled search that never got below the starting cost is a failure; a
/// stall after progress is a usable (if early) result.
fn failed_to_descend(meta: &RunMetadata) -> bool {
    meta.termination == Termination::StalledLineSearch && !(meta.final_cost < meta.initial_cost)
}

pub(crate) fn unmix(args: &UnmixArgs, file: &RunConfig) -> Result<i32> {
    let input = require(&args.input, &file.input, "input")?;
    let out = require(&args.out, &file.out, "out")?;
    let algorithm: Algorithm = args.algo.or(file.algo()?).unwrap_or(AlgoArg::Rnmf).into();
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let config = solver_config(algorithm, seed, &args.solver, file)?;

    let x = load_observations(&input)?;
    let result = solvers::solve(&x, &config)?;
    let meta = run_metadata(&config, &result);

    create_dir(&out)?;
    io::write_matrix_csv(result.abundances.data(), out.join("A_est.csv"))?;
    io::write_matrix_csv(result.endmembers.data(), out.join("E_est.csv"))?;
    let mut trace = String::from("iteration,cost\n");
    for (i, c) in result.cost_trace.iter().enumerate() {
        trace.push_str(&format!("{i},{c}\n"));
    }
    io::write_bytes(&out.join("trace.csv"), trace.as_bytes())?;
    io::write_run_metadata(&meta, out.join("run.json"))?;

    if failed_to_descend(&meta) {
        eprintln!(
            "error: line search stalled after {} iterations without reducing the cost",
            meta.iterations
        );
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

/// `A_<tag>.csv` / `E_<tag>.csv` from `dir`, trying the tags in order.
fn load_pair(dir: &Path, tags: [&str; 2]) -> Result<(AbundanceMatrix<f64>, EndmemberMatrix<f64>)> {
    let tag = tags
        .iter()
        .find(|t| dir.join(format!("A_{t}.csv")).is_file())
        .unwrap_or(&tags[0]);
    let a = AbundanceMatrix::new(io::read_matrix_csv(dir.join(format!("A_{tag}.csv")))?)?;
    let e = EndmemberMatrix::new(io::read_matrix_csv(dir.join(format!("E_{tag}.csv")))?)?;
    Ok((a, e))
}

fn load_truth(dir: &Path) -> Result<(AbundanceMatrix<f64>, EndmemberMatrix<f64>)> {
    load_pair(dir, ["true", "est"])
}

fn score(
    truth: &(AbundanceMatrix<f64>, EndmemberMatrix<f64>),
    a_est: &AbundanceMatrix<f64>,
    e_est: &EndmemberMatrix<f64>,
) -> Result<MetricReport<f64>> {
    metrics::evaluate(&truth.1, &truth.0, e_est, a_est)
}

pub(crate) fn evaluate(args: &EvaluateArgs, file: &RunConfig) -> Result<i32> {
    let est_dir = require(&args.est, &file.est, "est")?;
    let truth_dir = require(&args.truth, &file.truth, "truth")?;
    let out = require(&args.out, &file.out, "out")?;

    let truth = load_truth(&truth_dir)?;
    let (a_est, e_est) = load_pair(&est_dir, ["est", "true"])?;
    let report = score(&truth, &a_est, &e_est)?;
    let run_path = est_dir.join("run.json");
    let meta = if run_path.is_file() {
        Some(io::read_run_metadata(&run_path)?)
    } else {
        None
    };
    io::write_report(&ReportDocument::new(&report, meta.as_ref()), &out)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct CompareRow {
    algorithm: Algorithm,
    seed: u64,
    rms_sad_deg: f64,
    rms_aad_deg: f64,
    iterations: usize,
    termination: Termination,
    final_cost: f64,
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct MedianRow {
    algorithm: Algorithm,
    rms_sad_deg: f64,
    rms_aad_deg: f64,
}

#[derive(Debug, Serialize)]
struct CompareTable<'a> {
    input: &'a Path,
    truth: &'a Path,
    seeds: &'a [u64],
    nmf_config: &'a SolverConfig,
    rnmf_config: &'a SolverConfig,
    results: Vec<CompareRow>,
    medians: Vec<MedianRow>,
    /// Seeds where robust NMF beats NMF on both rms angles.
    rnmf_better_both: usize,
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn compare(args: &CompareArgs, file: &RunConfig) -> Result<i32> {
    let input = require(&args.input, &file.input, "input")?;
    let truth_dir = require(&args.truth, &file.truth, "truth")?;
    let out = require(&args.out, &file.out, "out")?;
    let seeds = parse_seeds(args.seeds.as_deref().or(file.seeds.as_deref()).unwrap_or("0"))?;
    let nmf = solver_config(Algorithm::Nmf, 0, &args.solver, file)?;
    let rnmf = solver_config(Algorithm::Rnmf, 0, &args.solver, file)?;

    let x = load_observations(&input)?;
    let truth = load_truth(&truth_dir)?;

    let cells: Vec<(Algorithm, u64)> = [Algorithm::Nmf, Algorithm::Rnmf]
        .iter()
        .flat_map(|&a| seeds.iter().map(move |&s| (a, s)))
        .collect();
    let mut results = cells
        .par_iter()
        .map(|&(algorithm, seed)| {
            let base = if algorithm == Algorithm::Nmf { &nmf } else { &rnmf };
            let config = SolverConfig { seed, ..base.clone() };
            let result = solvers::solve(&x, &config)?;
            let report = score(&truth, &result.abundances, &result.endmembers)?;
            Ok(CompareRow {
                algorithm,
                seed,
                rms_sad_deg: report.rms_sad.to_degrees(),
                rms_aad_deg: report.rms_aad.to_degrees(),
                iterations: result.iterations,
                termination: result.termination,
                final_cost: *result.cost_trace.last().expect("non-empty trace"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by_key(|r| (r.algorithm == Algorithm::Rnmf, r.seed));

    let medians = [Algorithm::Nmf, Algorithm::Rnmf]
        .iter()
        .map(|&algorithm| {
            let rows: Vec<&CompareRow> = results.iter().filter(|r| r.algorithm == algorithm).collect();
            MedianRow {
                algorithm,
                rms_sad_deg: median(&rows.iter().map(|r| r.rms_sad_deg).collect::<Vec<_>>()),
                rms_aad_deg: median(&rows.iter().map(|r| r.rms_aad_deg).collect::<Vec<_>>()),
            }
        })
        .collect();
    let rnmf_better_both = seeds
        .iter()
        .filter(|&&s| {
            let find = |a| results.iter().find(|r| r.algorithm == a && r.seed == s).unwrap();
            let (n, r) = (find(Algorithm::Nmf), find(Algorithm::Rnmf));
            r.rms_sad_deg < n.rms_sad_deg && r.rms_aad_deg < n.rms_aad_deg
        })
        .count();

    let table = CompareTable {
        input: &input,
        truth: &truth_dir,
        seeds: &seeds,
        nmf_config: &nmf,
        rnmf_config: &rnmf,
        results,
        medians,
        rnmf_better_both,
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_json(&table, &out)?;
    Ok(EXIT_OK)
}

fn write_json<S: Serialize>(value: &S, path: &PathBuf) -> Result<()> {
    io::write_bytes(path, io::to_json_pretty(value).as_bytes())
}
