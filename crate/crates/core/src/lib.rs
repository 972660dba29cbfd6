//! Joint phase noise and channel estimation for OFDM.
//!
//! The receiver observes one OFDM block multiplied sample-wise by an unknown
//! unimodular phase-noise sequence and convolved with an unknown short channel.
//! Estimation runs entirely in the time domain: the channel is eliminated in
//! closed form through an orthogonal projector, leaving a unimodular quadratic
//! program over the phase vector which is solved by majorization-minimization
//! (two surrogate choices, TQM and LQM), optionally on a reduced
//! piecewise-constant phase grid with the grid size selected by BIC.
//!
//! Module map:
//! - [`numerics`]: unitary DFT primitives and the factored projector.
//! - [`signal`]: channel / phase-noise / symbol generation and the received block.
//! - [`estimators`]: the MM solvers, PCT reduction, BIC selection, channel estimate.
//! - [`baselines`]: alternating least-squares (AltOpt) and alternating MM (AltMM).
//! - [`harness`]: Monte Carlo driver, error metrics, timing.
//! - [`oracle`]: dense reference implementations used by the test suites.

pub mod baselines;
mod error;
pub mod estimators;
pub mod harness;
pub mod numerics;
pub mod oracle;
pub mod signal;

pub use error::Error;

/// Complex baseband sample, double precision throughout.
pub type C64 = num_complex::Complex<f64>;
