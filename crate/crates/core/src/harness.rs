//! Monte Carlo harness: scenario descriptions, per-trial metrics, and the
//! parallel sweep that aggregates them.
//!
//! Reproducibility contract: trial (cell, t) draws from its own RNG stream
//! derived from the master seed, and aggregates are folded in trial order, so
//! every statistic except wall time is byte-stable under any worker count.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{altmm_run, altopt_run, AltConfig};
use crate::estimators::{
    channel_estimate_with, default_pct_candidates, objective, opt_pct_estimate,
    remove_phase_ambiguity, run_mm, EstimateResult, MmConfig, MmVariant, PctTransform,
};
use crate::numerics::ProjectorB;
use crate::signal::{
    gen_channel, gen_gaussian_phase, gen_symbols, gen_wiener_phase, snr_to_sigma,
    transmit_receive, trial_rng, BlockRealization, ChannelParams, PhaseModel,
};
use crate::{Error, C64};

/// One parameter cell of a sweep.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub n_c: usize,
    /// Channel length L.
    pub channel_len: usize,
    /// Exponential decay rate of the tap power profile.
    pub decay_rate: f64,
    pub phase: PhaseModel,
    pub snr_db: f64,
    pub trials: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_c == 0 {
            return Err(Error::EmptyInput);
        }
        if self.channel_len == 0 || self.channel_len >= self.n_c {
            return Err(Error::ChannelTooLong {
                l: self.channel_len,
                n_c: self.n_c,
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidParam("trials must be >= 1".into()));
        }
        match &self.phase {
            PhaseModel::Wiener(p) => p.validate(),
            PhaseModel::Gaussian(p) => p.validate(),
        }
    }

    pub fn phase_model_name(&self) -> &'static str {
        match self.phase {
            PhaseModel::Wiener(_) => "wiener",
            PhaseModel::Gaussian(_) => "gaussian",
        }
    }

    pub fn delta_f_hz(&self) -> f64 {
        match self.phase {
            PhaseModel::Wiener(p) => p.delta_f_3db,
            PhaseModel::Gaussian(p) => p.delta_f_3db,
        }
    }
}

/// Which estimator a sweep row runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorSpec {
    Tqm,
    Lqm,
    TqmPct(usize),
    LqmPct(usize),
    TqmOptPct,
    AltOpt,
    AltMm,
    /// Least-squares channel estimate assuming no phase noise.
    IgnorePhn,
    /// Channel estimate at the true phase trajectory; genie lower bound.
    ExactPhn,
}

impl EstimatorSpec {
    pub fn parse(name: &str) -> Result<Self, Error> {
        let bad = |name: &str| {
            Error::InvalidParam(format!(
                "unknown estimator '{name}'; expected one of tqm, lqm, tqm-pct:N, \
                 lqm-pct:N, tqm-optpct, altopt, altmm, ignore-phn, exact-phn"
            ))
        };
        if let Some(n) = name.strip_prefix("tqm-pct:") {
            let n: usize = n.parse().map_err(|_| bad(name))?;
            return Ok(Self::TqmPct(n));
        }
        if let Some(n) = name.strip_prefix("lqm-pct:") {
            let n: usize = n.parse().map_err(|_| bad(name))?;
            return Ok(Self::LqmPct(n));
        }
        match name {
            "tqm" => Ok(Self::Tqm),
            "lqm" => Ok(Self::Lqm),
            "tqm-optpct" => Ok(Self::TqmOptPct),
            "altopt" => Ok(Self::AltOpt),
            "altmm" => Ok(Self::AltMm),
            "ignore-phn" => Ok(Self::IgnorePhn),
            "exact-phn" => Ok(Self::ExactPhn),
            _ => Err(bad(name)),
        }
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tqm => write!(f, "tqm"),
            Self::Lqm => write!(f, "lqm"),
            Self::TqmPct(n) => write!(f, "tqm-pct:{n}"),
            Self::LqmPct(n) => write!(f, "lqm-pct:{n}"),
            Self::TqmOptPct => write!(f, "tqm-optpct"),
            Self::AltOpt => write!(f, "altopt"),
            Self::AltMm => write!(f, "altmm"),
            Self::IgnorePhn => write!(f, "ignore-phn"),
            Self::ExactPhn => write!(f, "exact-phn"),
        }
    }
}

/// Metrics of one (scenario, estimator, trial) run.
#[derive(Debug, Clone, Copy)]
pub struct TrialMetrics {
    pub phase_mse: f64,
    pub channel_mse: f64,
    pub iterations: usize,
    /// Estimation time only; data generation and metrics are excluded.
    pub wall_ms: f64,
    /// Time spent computing the two error metrics.
    pub mse_ms: f64,
    pub bic: Option<f64>,
    pub selected_n: Option<usize>,
}

/// One output row of a sweep: aggregates over the trials of one
/// (scenario, estimator) cell.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub scenario_id: String,
    pub n_c: usize,
    pub l: usize,
    pub phase_model: String,
    pub delta_f_hz: f64,
    pub snr_db: f64,
    pub estimator: String,
    /// Fixed reduced dimension, or its per-trial mean for the BIC-selected
    /// estimator; absent for full-dimension methods.
    pub n_reduced: Option<f64>,
    pub trials: usize,
    pub phase_mse_mean: f64,
    pub phase_mse_min: f64,
    pub phase_mse_max: f64,
    pub channel_mse_mean: f64,
    pub channel_mse_min: f64,
    pub channel_mse_max: f64,
    pub iters_mean: f64,
    pub wall_ms_mean: f64,
    pub wall_ms_min: f64,
    pub wall_ms_max: f64,
    pub mse_ms_mean: f64,
    pub bic_mean: Option<f64>,
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = x.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Summed squared phase error after removing the best common offset:
/// sum_n wrap(theta_hat_n - theta_n - alpha*)^2 with
/// alpha* = arg(sum_n e^{j(theta_hat_n - theta_n)}).
pub fn phase_mse(theta_hat: &[f64], theta: &[f64]) -> f64 {
    debug_assert_eq!(theta_hat.len(), theta.len());
    let resultant: C64 = theta_hat
        .iter()
        .zip(theta)
        .map(|(&a, &b)| C64::from_polar(1.0, a - b))
        .sum();
    let alpha = if resultant.norm() > 0.0 {
        resultant.arg()
    } else {
        0.0
    };
    theta_hat
        .iter()
        .zip(theta)
        .map(|(&a, &b)| wrap_angle(a - b - alpha).powi(2))
        .sum()
}

/// Squared channel error modulo a common phase:
/// ||h_hat||^2 + ||h||^2 - 2 |<h_hat, h>|.
pub fn channel_mse(h_hat: &[C64], h: &[C64]) -> f64 {
    debug_assert_eq!(h_hat.len(), h.len());
    let a: f64 = h_hat.iter().map(|z| z.norm_sqr()).sum();
    let b: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    let inner: C64 = h_hat.iter().zip(h).map(|(x, y)| x.conj() * y).sum();
    (a + b - 2.0 * inner.norm()).max(0.0)
}

/// Generate the ground-truth block of trial (cell, t). Gaussian trajectories
/// are rotated so theta[0] = 0, matching the CFO-corrected observation model.
pub fn generate_block(
    scenario: &Scenario,
    master_seed: u64,
    cell_index: u64,
    trial_index: u64,
) -> Result<BlockRealization, Error> {
    let mut rng = trial_rng(master_seed, cell_index, trial_index);
    let s = gen_symbols(&mut rng, scenario.n_c);
    let h = gen_channel(
        &mut rng,
        &ChannelParams {
            length: scenario.channel_len,
            decay_rate: scenario.decay_rate,
        },
    );
    let theta = match &scenario.phase {
        PhaseModel::Wiener(p) => gen_wiener_phase(&mut rng, scenario.n_c, p),
        PhaseModel::Gaussian(p) => {
            let raw = gen_gaussian_phase(&mut rng, scenario.n_c, p);
            let t0 = raw[0];
            raw.into_iter().map(|t| t - t0).collect()
        }
    };
    let sigma = if scenario.snr_db.is_finite() {
        snr_to_sigma(&s, &h, scenario.snr_db)
    } else {
        0.0
    };
    transmit_receive(&mut rng, &s, &h, &theta, sigma)
}

/// Run one estimator on one realized block.
pub fn estimate(
    spec: &EstimatorSpec,
    block: &BlockRealization,
    l: usize,
) -> Result<EstimateResult, Error> {
    let n_c = block.y.len();
    let b = ProjectorB::new(&block.s, l)?;
    match spec {
        EstimatorSpec::Tqm => run_mm(&MmConfig::new(MmVariant::Tqm), &block.y, &b),
        EstimatorSpec::Lqm => run_mm(&MmConfig::new(MmVariant::Lqm), &block.y, &b),
        EstimatorSpec::TqmPct(n) => {
            let config = MmConfig::new(MmVariant::Tqm).with_reduction(PctTransform::new(n_c, *n)?);
            run_mm(&config, &block.y, &b)
        }
        EstimatorSpec::LqmPct(n) => {
            let config = MmConfig::new(MmVariant::Lqm).with_reduction(PctTransform::new(n_c, *n)?);
            run_mm(&config, &block.y, &b)
        }
        EstimatorSpec::TqmOptPct => {
            let sigma_sq = (2.0 * block.noise_sigma * block.noise_sigma).max(1e-30);
            opt_pct_estimate(
                &block.y,
                &b,
                sigma_sq,
                &default_pct_candidates(n_c),
                &MmConfig::new(MmVariant::Tqm),
            )
        }
        EstimatorSpec::AltOpt => altopt_run(&AltConfig::default(), &block.r, &block.s, l),
        EstimatorSpec::AltMm => altmm_run(&AltConfig::default(), &block.r, &block.s, l),
        EstimatorSpec::IgnorePhn => {
            let u = vec![C64::new(1.0, 0.0); n_c];
            let h_hat = channel_estimate_with(&b, &u, &block.y)?;
            let e = objective(&u, &block.y, &b)?;
            Ok(EstimateResult {
                theta_hat: vec![0.0; n_c],
                u_star: u,
                h_hat,
                objective_trace: vec![e],
                delta_trace: Vec::new(),
                iterations: 0,
                converged: true,
                bic: None,
                selected_n: None,
            })
        }
        EstimatorSpec::ExactPhn => {
            let u_raw: Vec<C64> = block
                .theta
                .iter()
                .map(|&t| C64::from_polar(1.0, -t))
                .collect();
            let u = remove_phase_ambiguity(&u_raw);
            let h_hat = channel_estimate_with(&b, &u, &block.y)?;
            let e = objective(&u, &block.y, &b)?;
            let theta_hat = u.iter().map(|z| -z.arg()).collect();
            Ok(EstimateResult {
                u_star: u,
                theta_hat,
                h_hat,
                objective_trace: vec![e],
                delta_trace: Vec::new(),
                iterations: 0,
                converged: true,
                bic: None,
                selected_n: None,
            })
        }
    }
}

/// Run one trial end to end. Wall time covers estimation only, not data
/// generation.
pub fn run_trial(
    scenario: &Scenario,
    spec: &EstimatorSpec,
    master_seed: u64,
    cell_index: u64,
    trial_index: u64,
) -> Result<TrialMetrics, Error> {
    let block = generate_block(scenario, master_seed, cell_index, trial_index)?;
    let start = Instant::now();
    let result = estimate(spec, &block, scenario.channel_len)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let metric_start = Instant::now();
    let phase = phase_mse(&result.theta_hat, &block.theta);
    let channel = channel_mse(&result.h_hat, &block.h);
    let mse_ms = metric_start.elapsed().as_secs_f64() * 1e3;
    Ok(TrialMetrics {
        phase_mse: phase,
        channel_mse: channel,
        iterations: result.iterations,
        wall_ms,
        mse_ms,
        bic: result.bic,
        selected_n: result.selected_n,
    })
}

fn aggregate(
    scenario: &Scenario,
    spec: &EstimatorSpec,
    metrics: &[TrialMetrics],
) -> AggregateRow {
    let n = metrics.len() as f64;
    let mut row = AggregateRow {
        scenario_id: scenario.id.clone(),
        n_c: scenario.n_c,
        l: scenario.channel_len,
        phase_model: scenario.phase_model_name().to_string(),
        delta_f_hz: scenario.delta_f_hz(),
        snr_db: scenario.snr_db,
        estimator: spec.to_string(),
        n_reduced: None,
        trials: metrics.len(),
        phase_mse_mean: 0.0,
        phase_mse_min: f64::INFINITY,
        phase_mse_max: f64::NEG_INFINITY,
        channel_mse_mean: 0.0,
        channel_mse_min: f64::INFINITY,
        channel_mse_max: f64::NEG_INFINITY,
        iters_mean: 0.0,
        wall_ms_mean: 0.0,
        wall_ms_min: f64::INFINITY,
        wall_ms_max: f64::NEG_INFINITY,
        mse_ms_mean: 0.0,
        bic_mean: None,
    };
    let mut bic_sum = 0.0;
    let mut bic_count = 0usize;
    let mut n_sum = 0.0;
    let mut n_count = 0usize;
    for m in metrics {
        row.phase_mse_mean += m.phase_mse;
        row.phase_mse_min = row.phase_mse_min.min(m.phase_mse);
        row.phase_mse_max = row.phase_mse_max.max(m.phase_mse);
        row.channel_mse_mean += m.channel_mse;
        row.channel_mse_min = row.channel_mse_min.min(m.channel_mse);
        row.channel_mse_max = row.channel_mse_max.max(m.channel_mse);
        row.iters_mean += m.iterations as f64;
        row.wall_ms_mean += m.wall_ms;
        row.wall_ms_min = row.wall_ms_min.min(m.wall_ms);
        row.wall_ms_max = row.wall_ms_max.max(m.wall_ms);
        row.mse_ms_mean += m.mse_ms;
        if let Some(b) = m.bic {
            bic_sum += b;
            bic_count += 1;
        }
        if let Some(sel) = m.selected_n {
            n_sum += sel as f64;
            n_count += 1;
        }
    }
    row.phase_mse_mean /= n;
    row.channel_mse_mean /= n;
    row.iters_mean /= n;
    row.wall_ms_mean /= n;
    row.mse_ms_mean /= n;
    if bic_count > 0 {
        row.bic_mean = Some(bic_sum / bic_count as f64);
    }
    if n_count > 0 {
        row.n_reduced = Some(n_sum / n_count as f64);
    }
    row
}

/// Run every (scenario, estimator) cell for its configured trial count.
/// Trials run on the current rayon pool; results are folded in trial order so
/// the aggregates are identical under any worker count.
pub fn run_monte_carlo(
    scenarios: &[Scenario],
    estimators: &[EstimatorSpec],
    master_seed: u64,
) -> Result<Vec<AggregateRow>, Error> {
    if scenarios.is_empty() || estimators.is_empty() {
        return Err(Error::EmptyInput);
    }
    for s in scenarios {
        s.validate()?;
    }
    let mut rows = Vec::with_capacity(scenarios.len() * estimators.len());
    for (si, scenario) in scenarios.iter().enumerate() {
        for (ei, spec) in estimators.iter().enumerate() {
            let cell = (si * estimators.len() + ei) as u64;
            let metrics: Result<Vec<TrialMetrics>, Error> = (0..scenario.trials)
                .into_par_iter()
                .map(|t| run_trial(scenario, spec, master_seed, cell, t as u64))
                .collect();
            rows.push(aggregate(scenario, spec, &metrics?));
        }
    }
    Ok(rows)
}
