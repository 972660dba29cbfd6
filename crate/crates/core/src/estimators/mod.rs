//! Time-domain phase noise estimation by majorization-minimization.
//!
//! The least-squares objective after eliminating the channel is
//!
//! ```text
//! E(u) = || (I - B) F Diag(y) u ||^2,    |u_n| = 1,
//! ```
//!
//! where u = e^{-j theta} and B projects onto the symbol-modulated channel
//! subspace. Two quadratic surrogates give closed-form unimodular updates:
//! TQM bounds the projector part only (lambda = 1), LQM bounds the full
//! weighted matrix (lambda = ||y||_inf^2). Both can run on a reduced
//! piecewise-constant grid, with the grid size picked by BIC.

mod pct;

pub use pct::PctTransform;

use crate::numerics::ProjectorB;
use crate::{Error, C64};

/// Modulus slack accepted before an input is rejected as non-unimodular.
const UNIMODULAR_TOL: f64 = 1e-9;

/// Entries of the pre-arg vector below this magnitude leave the corresponding
/// phase entry unchanged: any unit value minimizes a zero linear term.
const ARG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmVariant {
    Tqm,
    Lqm,
}

/// Solver configuration shared by the full and PCT-reduced iterations.
#[derive(Debug, Clone)]
pub struct MmConfig {
    /// l2 norm of the difference of consecutive iterates (at reduced length
    /// when a PCT is active) below which the run stops.
    pub tolerance: f64,
    pub max_iters: usize,
    pub variant: MmVariant,
    pub reduction: Option<PctTransform>,
    /// Starting iterate at the working (reduced) length; all-ones when absent.
    pub warm_start: Option<Vec<C64>>,
}

impl MmConfig {
    pub fn new(variant: MmVariant) -> Self {
        Self {
            tolerance: 1e-8,
            max_iters: 1000,
            variant,
            reduction: None,
            warm_start: None,
        }
    }

    pub fn with_reduction(mut self, pct: PctTransform) -> Self {
        self.reduction = Some(pct);
        self
    }

    fn validate(&self) -> Result<(), Error> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParam(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParam("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    /// Unimodular solution at full length, u* = e^{-j theta_hat}, u*[0] = 1.
    pub u_star: Vec<C64>,
    pub theta_hat: Vec<f64>,
    pub h_hat: Vec<C64>,
    /// Objective at the initial point and after every update.
    pub objective_trace: Vec<f64>,
    /// l2 distance between consecutive iterates, one entry per update.
    pub delta_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub bic: Option<f64>,
    pub selected_n: Option<usize>,
}

fn check_unimodular(u: &[C64]) -> Result<(), Error> {
    for (i, z) in u.iter().enumerate() {
        let m = z.norm();
        if (m - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::NonUnimodular {
                index: i,
                modulus: m,
            });
        }
    }
    Ok(())
}

fn check_lengths(u: &[C64], y: &[C64], b: &ProjectorB) -> Result<(), Error> {
    if y.len() != b.block_len() {
        return Err(Error::DimensionMismatch {
            expected: b.block_len(),
            got: y.len(),
        });
    }
    if u.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Diag(y)^H F^H B F Diag(y) u, the shared kernel of both updates.
fn projected_kernel(u: &[C64], y: &[C64], b: &ProjectorB) -> Result<Vec<C64>, Error> {
    let weighted: Vec<C64> = y.iter().zip(u).map(|(y, u)| y * u).collect();
    let spectrum = b.dft().forward(&weighted);
    let projected = b.apply(&spectrum)?;
    let back = b.dft().inverse(&projected);
    Ok(y.iter().zip(&back).map(|(y, t)| y.conj() * t).collect())
}

/// Normalize each entry of `a` to the unit circle, keeping the previous phase
/// where the magnitude underflows.
fn unit_or_keep(a: &[C64], prev: &[C64]) -> Vec<C64> {
    a.iter()
        .zip(prev)
        .map(|(z, p)| {
            let m = z.norm();
            if m < ARG_FLOOR {
                *p
            } else {
                z / m
            }
        })
        .collect()
}

/// E(u) = ||(I - B) F (y . u)||^2, evaluated with one FFT, one projector
/// application, and one norm.
pub fn objective(u: &[C64], y: &[C64], b: &ProjectorB) -> Result<f64, Error> {
    check_lengths(u, y, b)?;
    check_unimodular(u)?;
    let weighted: Vec<C64> = y.iter().zip(u).map(|(y, u)| y * u).collect();
    let spectrum = b.dft().forward(&weighted);
    let projected = b.apply(&spectrum)?;
    Ok(spectrum
        .iter()
        .zip(&projected)
        .map(|(z, p)| (z - p).norm_sqr())
        .sum())
}

/// Tight quadratic majorization update:
/// u+ = exp[j arg(Diag(y)^H F^H B F Diag(y) u)].
pub fn tqm_step(u: &[C64], y: &[C64], b: &ProjectorB) -> Result<Vec<C64>, Error> {
    check_lengths(u, y, b)?;
    check_unimodular(u)?;
    let kernel = projected_kernel(u, y, b)?;
    Ok(unit_or_keep(&kernel, u))
}

/// Loose quadratic majorization update:
/// u+ = exp[j arg((||y||_inf^2 1 - |y|^2) . u + Diag(y)^H F^H B F Diag(y) u)].
pub fn lqm_step(u: &[C64], y: &[C64], b: &ProjectorB) -> Result<Vec<C64>, Error> {
    check_lengths(u, y, b)?;
    check_unimodular(u)?;
    let lambda = y.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let kernel = projected_kernel(u, y, b)?;
    let a: Vec<C64> = u
        .iter()
        .zip(y)
        .zip(&kernel)
        .map(|((u, y), k)| u * (lambda - y.norm_sqr()) + k)
        .collect();
    Ok(unit_or_keep(&a, u))
}

/// TQM on the reduced grid: u+ = exp[j arg(T^H K T u)] with K the full kernel.
pub fn tqm_step_reduced(
    u_reduced: &[C64],
    y: &[C64],
    b: &ProjectorB,
    t: &PctTransform,
) -> Result<Vec<C64>, Error> {
    check_unimodular(u_reduced)?;
    let full = t.expand(u_reduced)?;
    check_lengths(&full, y, b)?;
    let kernel = projected_kernel(&full, y, b)?;
    let a = t.adjoint(&kernel)?;
    Ok(unit_or_keep(&a, u_reduced))
}

/// LQM on the reduced grid with lambda = ||y||_inf^2 N_s:
/// u+ = exp[j arg((lambda I - T^H V~ T) u)].
pub fn lqm_step_reduced(
    u_reduced: &[C64],
    y: &[C64],
    b: &ProjectorB,
    t: &PctTransform,
) -> Result<Vec<C64>, Error> {
    check_unimodular(u_reduced)?;
    let full = t.expand(u_reduced)?;
    check_lengths(&full, y, b)?;
    let lambda = y.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max) * t.block_size() as f64;
    // V~ x = |y|^2 . x - K x with K the projected kernel, both at full length.
    let kernel = projected_kernel(&full, y, b)?;
    let vt: Vec<C64> = full
        .iter()
        .zip(y)
        .zip(&kernel)
        .map(|((x, y), k)| x * y.norm_sqr() - k)
        .collect();
    let tvt = t.adjoint(&vt)?;
    let a: Vec<C64> = u_reduced
        .iter()
        .zip(&tvt)
        .map(|(u, v)| u * lambda - v)
        .collect();
    Ok(unit_or_keep(&a, u_reduced))
}

/// Rotate so the first entry is exactly 1; the objective is invariant under a
/// common phase, and a zero common phase is what the CFO-corrected model fixes.
pub fn remove_phase_ambiguity(u: &[C64]) -> Vec<C64> {
    if u.is_empty() {
        return Vec::new();
    }
    let pivot = u[0];
    if pivot.norm() < ARG_FLOOR {
        return u.to_vec();
    }
    let rot = pivot.conj() / pivot.norm();
    let mut out: Vec<C64> = u.iter().map(|z| z * rot).collect();
    out[0] = C64::new(1.0, 0.0);
    out
}

/// Closed-form least-squares channel estimate at a given phase estimate:
/// h_hat = (1/sqrt(N_c)) G^{-1} F_check^H S^H F (u . y).
pub fn channel_estimate_with(b: &ProjectorB, u: &[C64], y: &[C64]) -> Result<Vec<C64>, Error> {
    check_lengths(u, y, b)?;
    check_unimodular(u)?;
    let derotated: Vec<C64> = u.iter().zip(y).map(|(u, y)| u * y).collect();
    let spectrum = b.dft().forward(&derotated);
    let coeffs = b.analysis(&spectrum)?;
    let solved = b.solve_gram(&coeffs)?;
    let scale = 1.0 / (b.block_len() as f64).sqrt();
    Ok(solved.into_iter().map(|z| z * scale).collect())
}

/// As [`channel_estimate_with`], constructing the projector from (s, L).
pub fn channel_estimate(u: &[C64], y: &[C64], s: &[C64], l: usize) -> Result<Vec<C64>, Error> {
    let b = ProjectorB::new(s, l)?;
    channel_estimate_with(&b, u, y)
}

/// BIC(u_N) = E / sigma^2 + N ln N_c.
pub fn bic_score(objective_value: f64, sigma_sq: f64, n: usize, n_c: usize) -> Result<f64, Error> {
    if !(sigma_sq > 0.0) {
        return Err(Error::NonPositiveSigma(sigma_sq));
    }
    Ok(objective_value / sigma_sq + n as f64 * (n_c as f64).ln())
}

/// Residual-based plug-in for sigma^2 when the noise level is not declared:
/// the per-component variance of the projection residual, E / (2 N_c).
pub fn sigma_sq_from_residual(objective_value: f64, n_c: usize) -> f64 {
    objective_value / (2.0 * n_c as f64)
}

/// Run the configured MM iteration to convergence or the iteration cap.
pub fn run_mm(config: &MmConfig, y: &[C64], b: &ProjectorB) -> Result<EstimateResult, Error> {
    config.validate()?;
    let n_c = b.block_len();
    if y.len() != n_c {
        return Err(Error::DimensionMismatch {
            expected: n_c,
            got: y.len(),
        });
    }
    if let Some(t) = &config.reduction {
        if t.full_len() != n_c {
            return Err(Error::DimensionMismatch {
                expected: n_c,
                got: t.full_len(),
            });
        }
    }

    let working_len = config
        .reduction
        .as_ref()
        .map_or(n_c, PctTransform::reduced_len);
    let mut u = match &config.warm_start {
        Some(w) => {
            if w.len() != working_len {
                return Err(Error::DimensionMismatch {
                    expected: working_len,
                    got: w.len(),
                });
            }
            check_unimodular(w)?;
            w.clone()
        }
        None => vec![C64::new(1.0, 0.0); working_len],
    };

    let expand = |u: &[C64]| -> Result<Vec<C64>, Error> {
        match &config.reduction {
            Some(t) => t.expand(u),
            None => Ok(u.to_vec()),
        }
    };

    let mut objective_trace = vec![objective(&expand(&u)?, y, b)?];
    let mut delta_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iters {
        let next = match (&config.variant, &config.reduction) {
            (MmVariant::Tqm, None) => tqm_step(&u, y, b)?,
            (MmVariant::Lqm, None) => lqm_step(&u, y, b)?,
            (MmVariant::Tqm, Some(t)) => tqm_step_reduced(&u, y, b, t)?,
            (MmVariant::Lqm, Some(t)) => lqm_step_reduced(&u, y, b, t)?,
        };
        let delta = u
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        u = next;
        iterations += 1;
        objective_trace.push(objective(&expand(&u)?, y, b)?);
        delta_trace.push(delta);
        if delta <= config.tolerance {
            converged = true;
            break;
        }
    }

    let u_full = remove_phase_ambiguity(&expand(&u)?);
    let theta_hat: Vec<f64> = u_full.iter().map(|z| -z.arg()).collect();
    let h_hat = channel_estimate_with(b, &u_full, y)?;
    Ok(EstimateResult {
        u_star: u_full,
        theta_hat,
        h_hat,
        objective_trace,
        delta_trace,
        iterations,
        converged,
        bic: None,
        selected_n: config.reduction.as_ref().map(PctTransform::reduced_len),
    })
}

/// Run TQM (or the configured variant) once per PCT candidate and keep the
/// estimate with the minimal BIC. The data-fit term is the full-length
/// objective of the expanded estimate.
pub fn opt_pct_estimate(
    y: &[C64],
    b: &ProjectorB,
    sigma_sq: f64,
    candidate_ns: &[usize],
    base_config: &MmConfig,
) -> Result<EstimateResult, Error> {
    if candidate_ns.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if !(sigma_sq > 0.0) {
        return Err(Error::NonPositiveSigma(sigma_sq));
    }
    let n_c = b.block_len();
    let mut best: Option<EstimateResult> = None;
    for &n in candidate_ns {
        let mut config = base_config.clone();
        config.reduction = if n == n_c {
            None
        } else {
            Some(PctTransform::new(n_c, n)?)
        };
        config.warm_start = None;
        let mut result = run_mm(&config, y, b)?;
        let fit = *result
            .objective_trace
            .last()
            .expect("trace holds the initial value");
        result.bic = Some(bic_score(fit, sigma_sq, n, n_c)?);
        result.selected_n = Some(n);
        let better = match &best {
            None => true,
            Some(cur) => result.bic < cur.bic,
        };
        if better {
            best = Some(result);
        }
    }
    Ok(best.expect("candidate list checked nonempty"))
}

/// The default candidate grid {32, 64, ..., N_c}; falls back to {N_c} when
/// the block is 32 samples or shorter.
pub fn default_pct_candidates(n_c: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 32;
    while n < n_c {
        if n_c % n == 0 {
            out.push(n);
        }
        n *= 2;
    }
    out.push(n_c);
    out
}
