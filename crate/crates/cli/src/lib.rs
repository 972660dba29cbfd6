//! Configuration-driven front end for the estimation library: flat key-value
//! config files in, CSV out.
//!
//! Config grammar (one `key = value` per line, `#` starts a comment, list
//! values are comma-separated):
//!
//! ```text
//! run_id        = fig5          # optional prefix for scenario ids
//! n_c           = 512, 1024     # powers of two
//! l             = 10
//! decay_rate    = 0.7
//! f_s_hz        = 2e7
//! phase_model   = wiener        # wiener and/or gaussian
//! delta_f_hz    = 500, 5000
//! theta_rms_deg = 2.0           # gaussian model only
//! snr_db        = 15, 25, 35
//! trials        = 100
//! estimators    = tqm, tqm-pct:32, altmm
//! master_seed   = 1234
//! workers       = 4             # 0 = one per core
//! ```
//!
//! The scenario grid is the cartesian product of phase_model, n_c, delta_f_hz,
//! and snr_db. Validation reports every problem at once, not just the first.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ofdm_phn::harness::{
    estimate, generate_block, run_monte_carlo, AggregateRow, EstimatorSpec, Scenario,
};
use ofdm_phn::signal::{GaussianPhaseParams, PhaseModel, WienerPhaseParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Every validation problem found in the config, one message per line.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Run(#[from] ofdm_phn::Error),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub run_id: Option<String>,
    pub n_c: Vec<usize>,
    pub l: usize,
    pub decay_rate: f64,
    pub f_s_hz: f64,
    pub phase_models: Vec<String>,
    pub delta_f_hz: Vec<f64>,
    pub theta_rms_deg: f64,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub estimators: Vec<EstimatorSpec>,
    pub master_seed: u64,
    pub workers: usize,
}

fn parse_list<T: std::str::FromStr>(
    raw: &str,
    key: &str,
    errors: &mut Vec<String>,
) -> Vec<T> {
    let mut out = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        if item.is_empty() {
            errors.push(format!("{key}: empty list entry"));
            continue;
        }
        match item.parse() {
            Ok(v) => out.push(v),
            Err(_) => errors.push(format!("{key}: cannot parse '{item}'")),
        }
    }
    out
}

fn parse_scalar<T: std::str::FromStr>(
    raw: &str,
    key: &str,
    errors: &mut Vec<String>,
) -> Option<T> {
    match raw.trim().parse() {
        Ok(v) => Some(v),
        Err(_) => {
            errors.push(format!("{key}: cannot parse '{}'", raw.trim()));
            None
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "run_id",
    "n_c",
    "l",
    "decay_rate",
    "f_s_hz",
    "phase_model",
    "delta_f_hz",
    "theta_rms_deg",
    "snr_db",
    "trials",
    "estimators",
    "master_seed",
    "workers",
];

/// Parse and validate a config file. All problems are collected and returned
/// together.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<String, String> = BTreeMap::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {}: expected 'key = value'", lineno + 1));
            continue;
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            errors.push(format!("line {}: unknown key '{key}'", lineno + 1));
            continue;
        }
        if entries.insert(key.clone(), value.trim().to_string()).is_some() {
            errors.push(format!("line {}: duplicate key '{key}'", lineno + 1));
        }
    }

    let get = |key: &str| entries.get(key).map(String::as_str);

    let n_c: Vec<usize> = get("n_c")
        .map(|v| parse_list(v, "n_c", &mut errors))
        .unwrap_or_else(|| {
            errors.push("missing required key 'n_c'".into());
            Vec::new()
        });
    let delta_f_hz: Vec<f64> = get("delta_f_hz")
        .map(|v| parse_list(v, "delta_f_hz", &mut errors))
        .unwrap_or_else(|| {
            errors.push("missing required key 'delta_f_hz'".into());
            Vec::new()
        });
    let snr_db: Vec<f64> = get("snr_db")
        .map(|v| parse_list(v, "snr_db", &mut errors))
        .unwrap_or_else(|| {
            errors.push("missing required key 'snr_db'".into());
            Vec::new()
        });
    let phase_models: Vec<String> = get("phase_model")
        .map(|v| parse_list(v, "phase_model", &mut errors))
        .unwrap_or_else(|| vec!["wiener".to_string()]);
    let estimator_names: Vec<String> = get("estimators")
        .map(|v| parse_list(v, "estimators", &mut errors))
        .unwrap_or_else(|| {
            errors.push("missing required key 'estimators'".into());
            Vec::new()
        });
    let trials: usize = get("trials")
        .and_then(|v| parse_scalar(v, "trials", &mut errors))
        .unwrap_or(0);
    if get("trials").is_none() {
        errors.push("missing required key 'trials'".into());
    }

    let l: usize = get("l")
        .and_then(|v| parse_scalar(v, "l", &mut errors))
        .unwrap_or(10);
    let decay_rate: f64 = get("decay_rate")
        .and_then(|v| parse_scalar(v, "decay_rate", &mut errors))
        .unwrap_or(0.7);
    let f_s_hz: f64 = get("f_s_hz")
        .and_then(|v| parse_scalar(v, "f_s_hz", &mut errors))
        .unwrap_or(2e7);
    let theta_rms_deg: f64 = get("theta_rms_deg")
        .and_then(|v| parse_scalar(v, "theta_rms_deg", &mut errors))
        .unwrap_or(2.0);
    let master_seed: u64 = get("master_seed")
        .and_then(|v| parse_scalar(v, "master_seed", &mut errors))
        .unwrap_or(0);
    let workers: usize = get("workers")
        .and_then(|v| parse_scalar(v, "workers", &mut errors))
        .unwrap_or(0);
    let run_id = get("run_id").map(str::to_string);

    // Semantic validation.
    for &n in &n_c {
        if !n.is_power_of_two() {
            errors.push(format!("n_c must be a power of two, got {n}"));
        }
    }
    if get("trials").is_some() && trials == 0 {
        errors.push("trials must be >= 1".into());
    }
    if l == 0 {
        errors.push("l must be >= 1".into());
    }
    for &n in &n_c {
        if l >= n && l > 0 {
            errors.push(format!("channel length {l} must be smaller than n_c {n}"));
        }
    }
    if !(f_s_hz > 0.0) {
        errors.push(format!("f_s_hz must be > 0, got {f_s_hz}"));
    }
    for &df in &delta_f_hz {
        if !(df >= 0.0 && df < f_s_hz) {
            errors.push(format!("delta_f_hz must lie in [0, f_s), got {df}"));
        }
    }
    for model in &phase_models {
        if model != "wiener" && model != "gaussian" {
            errors.push(format!(
                "phase_model must be 'wiener' or 'gaussian', got '{model}'"
            ));
        }
    }
    if get("estimators").is_some() && estimator_names.is_empty() {
        errors.push("estimators list is empty".into());
    }
    let mut estimators = Vec::new();
    for name in &estimator_names {
        match EstimatorSpec::parse(name) {
            Ok(spec) => {
                if let EstimatorSpec::TqmPct(n) | EstimatorSpec::LqmPct(n) = spec {
                    for &nc in &n_c {
                        if n == 0 || nc % n != 0 {
                            errors.push(format!(
                                "PCT dimension {n} does not divide n_c {nc} (estimator '{name}')"
                            ));
                        }
                    }
                }
                estimators.push(spec);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }

    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    Ok(RunConfig {
        run_id,
        n_c,
        l,
        decay_rate,
        f_s_hz,
        phase_models,
        delta_f_hz,
        theta_rms_deg,
        snr_db,
        trials,
        estimators,
        master_seed,
        workers,
    })
}

/// Cartesian scenario grid in a fixed order: phase_model, n_c, delta_f, snr.
pub fn scenario_grid(config: &RunConfig) -> Vec<Scenario> {
    let mut out = Vec::new();
    for model in &config.phase_models {
        for &n_c in &config.n_c {
            for &df in &config.delta_f_hz {
                for &snr in &config.snr_db {
                    let phase = if model == "wiener" {
                        PhaseModel::Wiener(WienerPhaseParams {
                            f_s: config.f_s_hz,
                            delta_f_3db: df,
                        })
                    } else {
                        PhaseModel::Gaussian(GaussianPhaseParams {
                            f_s: config.f_s_hz,
                            delta_f_3db: df,
                            theta_rms_deg: config.theta_rms_deg,
                        })
                    };
                    let base = format!("nc{n_c}-{model}-df{df}-snr{snr}");
                    let id = match &config.run_id {
                        Some(prefix) => format!("{prefix}-{base}"),
                        None => base,
                    };
                    out.push(Scenario {
                        id,
                        n_c,
                        channel_len: config.l,
                        decay_rate: config.decay_rate,
                        phase,
                        snr_db: snr,
                        trials: config.trials,
                    });
                }
            }
        }
    }
    out
}

/// Keep only the estimators named in `filter`; names must be known.
pub fn filter_estimators(
    estimators: &[EstimatorSpec],
    filter: &str,
) -> Result<Vec<EstimatorSpec>, CliError> {
    let mut errors = Vec::new();
    let mut wanted = Vec::new();
    for name in filter.split(',') {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        match EstimatorSpec::parse(name) {
            Ok(spec) => wanted.push(spec),
            Err(e) => errors.push(e.to_string()),
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    let kept: Vec<EstimatorSpec> = estimators
        .iter()
        .copied()
        .filter(|e| wanted.contains(e))
        .collect();
    if kept.is_empty() {
        return Err(CliError::Config(vec![
            "estimator filter leaves nothing to run".into(),
        ]));
    }
    Ok(kept)
}

/// 12 significant digits; enough for a lossless-in-practice round trip while
/// keeping rows byte-stable across runs.
fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub const AGGREGATE_HEADER: &str = "scenario_id,n_c,L,phase_model,delta_f_hz,snr_db,estimator,\
n_reduced,trials,phase_mse_mean,phase_mse_min,phase_mse_max,channel_mse_mean,channel_mse_min,\
channel_mse_max,iters_mean,wall_ms_mean,wall_ms_min,wall_ms_max,bic_mean,\
phase_mse_mean_per_sample,channel_mse_mean_per_tap,mse_ms_mean";

/// Render aggregate rows to CSV. The last three columns carry per-sample
/// averages of the summed metrics and the metric-computation time.
pub fn render_aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    for row in rows {
        let n_reduced = row.n_reduced.map(fmt_float).unwrap_or_default();
        let bic = row.bic_mean.map(fmt_float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            quote(&row.scenario_id),
            row.n_c,
            row.l,
            row.phase_model,
            fmt_float(row.delta_f_hz),
            fmt_float(row.snr_db),
            quote(&row.estimator),
            n_reduced,
            row.trials,
            fmt_float(row.phase_mse_mean),
            fmt_float(row.phase_mse_min),
            fmt_float(row.phase_mse_max),
            fmt_float(row.channel_mse_mean),
            fmt_float(row.channel_mse_min),
            fmt_float(row.channel_mse_max),
            fmt_float(row.iters_mean),
            fmt_float(row.wall_ms_mean),
            fmt_float(row.wall_ms_min),
            fmt_float(row.wall_ms_max),
            bic,
            fmt_float(row.phase_mse_mean / row.n_c as f64),
            fmt_float(row.channel_mse_mean / row.l as f64),
            fmt_float(row.mse_ms_mean),
        );
    }
    out
}

fn with_pool<T: Send>(
    workers: usize,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(vec![format!("cannot build worker pool: {e}")]))?;
    pool.install(f)
}

/// Full sweep over the scenario grid; returns the aggregate CSV.
pub fn cmd_sweep(config: &RunConfig) -> Result<String, CliError> {
    let scenarios = scenario_grid(config);
    let estimators = config.estimators.clone();
    let seed = config.master_seed;
    let rows = with_pool(config.workers, move || {
        Ok(run_monte_carlo(&scenarios, &estimators, seed)?)
    })?;
    Ok(render_aggregate_csv(&rows))
}

fn single_cell(config: &RunConfig) -> Result<Scenario, CliError> {
    let grid = scenario_grid(config);
    if grid.len() != 1 {
        return Err(CliError::Config(vec![format!(
            "this command needs a single-cell config, the grid has {} cells",
            grid.len()
        )]));
    }
    Ok(grid.into_iter().next().expect("length checked"))
}

/// Per-iteration convergence trace of each estimator on trial 0 of a
/// single-cell config.
pub fn cmd_trace(config: &RunConfig) -> Result<String, CliError> {
    let scenario = single_cell(config)?;
    let mut out = String::from("estimator,iteration,objective,delta_u_norm\n");
    for (ei, spec) in config.estimators.iter().enumerate() {
        let block = generate_block(&scenario, config.master_seed, ei as u64, 0)?;
        let result = estimate(spec, &block, scenario.channel_len)?;
        for (i, objective) in result.objective_trace.iter().enumerate() {
            let delta = if i == 0 {
                String::new()
            } else {
                fmt_float(result.delta_trace[i - 1])
            };
            let _ = writeln!(
                out,
                "{},{},{},{}",
                quote(&spec.to_string()),
                i,
                fmt_float(*objective),
                delta
            );
        }
    }
    Ok(out)
}

/// Per-sample ground truth and estimates on trial 0 of a single-cell config.
pub fn cmd_single(config: &RunConfig) -> Result<String, CliError> {
    let scenario = single_cell(config)?;
    let block = generate_block(&scenario, config.master_seed, 0, 0)?;
    let mut estimates = Vec::new();
    for spec in &config.estimators {
        estimates.push(estimate(spec, &block, scenario.channel_len)?);
    }
    let mut out = String::from("index,theta_true");
    for spec in &config.estimators {
        let _ = write!(out, ",{}", quote(&format!("theta_hat:{spec}")));
    }
    out.push('\n');
    for n in 0..scenario.n_c {
        let _ = write!(out, "{},{}", n, fmt_float(block.theta[n]));
        for result in &estimates {
            let _ = write!(out, ",{}", fmt_float(result.theta_hat[n]));
        }
        out.push('\n');
    }
    Ok(out)
}
