//! Comparison algorithms: alternating least squares (AltOpt) and its
//! MM-corrected variant (AltMM).
//!
//! AltOpt alternates exact least-squares updates for the channel and for the
//! phase vector; its phase update is deliberately unconstrained, reproducing
//! the baseline whose relaxed iterates violate unimodularity. AltMM replaces
//! that update with an inner MM loop over the unit circle.
//!
//! Circulant matrices never appear explicitly: circ(F c) x = sqrt(N) F (c . F^H x),
//! so every application is two FFTs and a Hadamard product.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::estimators::{channel_estimate_with, remove_phase_ambiguity, EstimateResult};
use crate::numerics::{Dft, ProjectorB};
use crate::{Error, C64};

/// Relative floor applied to the circulant Gram eigenvalues in AltOpt's phase
/// update; near-zero spectral entries would otherwise blow up the iterate.
const EIGENVALUE_FLOOR_REL: f64 = 1e-12;

const ARG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy)]
pub struct AltConfig {
    pub outer_tolerance: f64,
    pub inner_tolerance: f64,
    pub outer_max_iters: usize,
    pub inner_max_iters: usize,
}

impl Default for AltConfig {
    fn default() -> Self {
        Self {
            outer_tolerance: 1e-8,
            inner_tolerance: 1e-8,
            outer_max_iters: 50,
            inner_max_iters: 1000,
        }
    }
}

impl AltConfig {
    fn validate(&self) -> Result<(), Error> {
        if !(self.outer_tolerance > 0.0 && self.inner_tolerance > 0.0) {
            return Err(Error::InvalidParam("tolerances must be positive".into()));
        }
        if self.outer_max_iters == 0 || self.inner_max_iters == 0 {
            return Err(Error::InvalidParam("iteration budgets must be >= 1".into()));
        }
        Ok(())
    }
}

fn l2_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Per-sample noiseless model d = F^H S F_check h; the received block is
/// y = sqrt(N) c . d plus noise.
fn time_domain_signal(dft: &Dft, s: &[C64], h: &[C64]) -> Result<Vec<C64>, Error> {
    let h_freq = dft.partial_forward(h)?;
    let modulated: Vec<C64> = s.iter().zip(&h_freq).map(|(s, hf)| s * hf).collect();
    Ok(dft.inverse(&modulated))
}

/// ||y - sqrt(N) c . d||^2, the least-squares residual in the time domain.
fn residual(y: &[C64], c: &[C64], d: &[C64]) -> f64 {
    let root_n = (y.len() as f64).sqrt();
    y.iter()
        .zip(c)
        .zip(d)
        .map(|((y, c), d)| (y - c * d * root_n).norm_sqr())
        .sum()
}

fn finish(
    c: &[C64],
    h_hat: Vec<C64>,
    objective_trace: Vec<f64>,
    delta_trace: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> EstimateResult {
    // End normalization: project the (possibly relaxed) iterate onto the unit
    // circle, then pin the common phase.
    let unit: Vec<C64> = c
        .iter()
        .map(|z| {
            let m = z.norm();
            if m < ARG_FLOOR {
                C64::new(1.0, 0.0)
            } else {
                z / m
            }
        })
        .collect();
    let u_star = remove_phase_ambiguity(&unit.iter().map(|z| z.conj()).collect::<Vec<_>>());
    let theta_hat = u_star.iter().map(|z| -z.arg()).collect();
    EstimateResult {
        u_star,
        theta_hat,
        h_hat,
        objective_trace,
        delta_trace,
        iterations,
        converged,
        bic: None,
        selected_n: None,
    }
}

/// Alternating least squares without the unimodular constraint.
///
/// Each outer iteration solves the channel subproblem exactly for the current
/// phase iterate, then the phase subproblem exactly over all of C^{N_c}. The
/// phase solve uses the circulant diagonalization of P^H P with a relative
/// eigenvalue floor; the result is normalized to unit modulus only on exit.
pub fn altopt_run(
    config: &AltConfig,
    r: &[C64],
    s: &[C64],
    l: usize,
) -> Result<EstimateResult, Error> {
    config.validate()?;
    let n_c = r.len();
    if n_c == 0 {
        return Err(Error::EmptyInput);
    }
    if s.len() != n_c {
        return Err(Error::DimensionMismatch {
            expected: n_c,
            got: s.len(),
        });
    }
    if l == 0 || l >= n_c {
        return Err(Error::ChannelTooLong { l, n_c });
    }
    let dft = Dft::new(n_c)?;
    let y = dft.inverse(r);
    let root_n = (n_c as f64).sqrt();

    // Columns of F^H S F_check, fixed throughout.
    let base_columns: Vec<Vec<C64>> = (0..l)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); l];
            e[j] = C64::new(1.0, 0.0);
            time_domain_signal(&dft, s, &e)
        })
        .collect::<Result<_, _>>()?;

    let mut c = vec![C64::new(1.0, 0.0); n_c];
    let mut h_hat = vec![C64::new(0.0, 0.0); l];
    let mut objective_trace = Vec::new();
    let mut delta_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.outer_max_iters {
        // Channel update: LS with design matrix sqrt(N) Diag(c) [F^H S F_check].
        let cols: Vec<Vec<C64>> = base_columns
            .iter()
            .map(|col| {
                col.iter()
                    .zip(&c)
                    .map(|(x, c)| x * c * root_n)
                    .collect::<Vec<C64>>()
            })
            .collect();
        let mut gram = DMatrix::<C64>::zeros(l, l);
        let mut rhs = DVector::<C64>::zeros(l);
        for k in 0..l {
            for j in 0..l {
                gram[(k, j)] = cols[k]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
            }
            rhs[k] = cols[k].iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        }
        let chol = Cholesky::new(gram).ok_or(Error::SingularGram { cond: f64::INFINITY })?;
        let solved = chol.solve(&rhs);
        h_hat = solved.iter().cloned().collect();

        // Phase update: c = (F^H P^H P F)^{-1} F^H P^H r, elementwise in the
        // spectral basis since F^H P^H P F = N Diag(|d|^2).
        let d = time_domain_signal(&dft, s, &h_hat)?;
        let max_d2 = d.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let floor = EIGENVALUE_FLOOR_REL * max_d2;
        let c_next: Vec<C64> = d
            .iter()
            .zip(&y)
            .map(|(d, y)| {
                let denom = d.norm_sqr().max(floor);
                d.conj() * y / (root_n * denom)
            })
            .collect();
        let delta = l2_diff(&c_next, &c);
        c = c_next;
        iterations += 1;
        objective_trace.push(residual(&y, &c, &d));
        delta_trace.push(delta);
        if delta <= config.outer_tolerance {
            converged = true;
            break;
        }
    }

    Ok(finish(
        &c,
        h_hat,
        objective_trace,
        delta_trace,
        iterations,
        converged,
    ))
}

/// Alternating minimization with an MM inner loop for the phase vector.
///
/// The outer channel update reuses the Gram factorization cached inside a
/// [`ProjectorB`]; the inner loop minimizes ||r - P F c||^2 over unimodular c
/// with the majorization constant lambda = N_c ||F^H (S F_check h)||_inf^2.
pub fn altmm_run(
    config: &AltConfig,
    r: &[C64],
    s: &[C64],
    l: usize,
) -> Result<EstimateResult, Error> {
    config.validate()?;
    let n_c = r.len();
    if s.len() != n_c {
        return Err(Error::DimensionMismatch {
            expected: n_c,
            got: s.len(),
        });
    }
    let proj = ProjectorB::new(s, l)?;
    let dft = proj.dft();
    let y = dft.inverse(r);
    let root_n = (n_c as f64).sqrt();

    let mut c = vec![C64::new(1.0, 0.0); n_c];
    let mut objective_trace = Vec::new();
    let mut delta_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut d = vec![C64::new(0.0, 0.0); n_c];

    for _ in 0..config.outer_max_iters {
        // Channel update; with unimodular c this is the closed-form LS
        // estimate at u = c*.
        let u: Vec<C64> = c.iter().map(|z| z.conj()).collect();
        let h_hat = channel_estimate_with(&proj, &u, &y)?;
        d = time_domain_signal(dft, s, &h_hat)?;

        // Inner MM on c: a = F^H P^H r + (lambda I - F^H P^H P F) c, and both
        // operators are diagonal in the time basis.
        let max_d2 = d.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let lambda = n_c as f64 * max_d2;
        let fpr: Vec<C64> = d.iter().zip(&y).map(|(d, y)| d.conj() * y * root_n).collect();
        let gain: Vec<f64> = d.iter().map(|z| lambda - n_c as f64 * z.norm_sqr()).collect();

        let mut inner = c.clone();
        for _ in 0..config.inner_max_iters {
            let next: Vec<C64> = fpr
                .iter()
                .zip(&gain)
                .zip(&inner)
                .map(|((f, g), c)| {
                    let a = f + c * *g;
                    let m = a.norm();
                    if m < ARG_FLOOR {
                        *c
                    } else {
                        a / m
                    }
                })
                .collect();
            let delta = l2_diff(&next, &inner);
            inner = next;
            if delta <= config.inner_tolerance {
                break;
            }
        }

        let delta = l2_diff(&inner, &c);
        c = inner;
        iterations += 1;
        objective_trace.push(residual(&y, &c, &d));
        delta_trace.push(delta);
        if delta <= config.outer_tolerance {
            converged = true;
            break;
        }
    }

    // One last channel solve at the final phase iterate.
    let u: Vec<C64> = c.iter().map(|z| z.conj()).collect();
    let h_hat = channel_estimate_with(&proj, &u, &y)?;
    let _ = d;
    Ok(finish(
        &c,
        h_hat,
        objective_trace,
        delta_trace,
        iterations,
        converged,
    ))
}

/// One inner MM sweep of the AltMM phase subproblem, exposed for testing the
/// descent and majorization properties in isolation.
pub fn altmm_inner_step(c: &[C64], y: &[C64], d: &[C64]) -> Vec<C64> {
    let n_c = y.len();
    let root_n = (n_c as f64).sqrt();
    let max_d2 = d.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let lambda = n_c as f64 * max_d2;
    c.iter()
        .zip(y)
        .zip(d)
        .map(|((c, y), d)| {
            let a = d.conj() * y * root_n + c * (lambda - n_c as f64 * d.norm_sqr());
            let m = a.norm();
            if m < ARG_FLOOR {
                *c
            } else {
                a / m
            }
        })
        .collect()
}

/// ||r - P F c||^2 expressed in the time domain, for inner-loop checks.
pub fn altmm_inner_objective(y: &[C64], c: &[C64], d: &[C64]) -> f64 {
    residual(y, c, d)
}
