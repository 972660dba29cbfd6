//! Dense reference implementations.
//!
//! Everything here materializes full matrices and runs in O(n^2) or worse.
//! These routines exist so the FFT/factored production paths can be checked
//! against straightforward formula transcriptions; none of them are used by
//! the estimators themselves.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::C64;

/// Largest block length accepted by the dense helpers.
pub const MAX_DENSE_N: usize = 256;

/// The n x n unitary DFT matrix, F_{k,l} = e^{-j2\pi kl/n} / sqrt(n).
pub fn dense_dft_matrix(n: usize) -> DMatrix<C64> {
    assert!(n > 0 && n <= MAX_DENSE_N);
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, l| {
        let ang = -2.0 * std::f64::consts::PI * (k as f64) * (l as f64) / n as f64;
        C64::from_polar(scale, ang)
    })
}

/// circ(c): entry (i, j) = c[(i - j) mod n].
pub fn circulant_dense(first_column: &[C64]) -> DMatrix<C64> {
    let n = first_column.len();
    assert!(n > 0 && n <= MAX_DENSE_N);
    DMatrix::from_fn(n, n, |i, j| first_column[(n + i - j) % n])
}

/// The dense projector B = A (A^H A)^{-1} A^H with A = Diag(s) F_check.
pub fn dense_projector(s: &[C64], l: usize) -> DMatrix<C64> {
    let n = s.len();
    assert!(l <= n);
    let f = dense_dft_matrix(n);
    let f_check = f.columns(0, l).into_owned();
    let a = DMatrix::from_fn(n, l, |i, j| s[i] * f_check[(i, j)]);
    let gram = a.adjoint() * &a;
    let gram_inv = gram.try_inverse().expect("dense Gram not invertible");
    &a * gram_inv * a.adjoint()
}

/// Dense V-tilde = Diag(y)^H F^H (I - B) F Diag(y).
pub fn dense_weighted_matrix(y: &[C64], s: &[C64], l: usize) -> DMatrix<C64> {
    let n = y.len();
    assert_eq!(s.len(), n);
    let f = dense_dft_matrix(n);
    let b = dense_projector(s, l);
    let i_minus_b = DMatrix::<C64>::identity(n, n) - b;
    let dy = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            y[i]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    dy.adjoint() * f.adjoint() * i_minus_b * &f * dy
}

/// ||Phi^H Phi - n I||_F / n for Phi = circ(F e^{j theta}).
///
/// Zero (to rounding) exactly when the underlying time-domain sequence is
/// unimodular; positive for relaxed iterates such as AltOpt's raw updates.
pub fn spectral_constraint_residual(theta: &[f64]) -> f64 {
    let n = theta.len();
    assert!(n > 0 && n <= MAX_DENSE_N);
    let f = dense_dft_matrix(n);
    let e_jtheta: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let phi = matvec(&f, &e_jtheta);
    let big_phi = circulant_dense(&phi);
    let gram = big_phi.adjoint() * big_phi;
    let diff = gram - DMatrix::<C64>::identity(n, n) * C64::new(n as f64, 0.0);
    diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / n as f64
}

pub fn matvec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), v.len());
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// Standard complex Gaussian vector, each component CN(0, 2).
pub fn random_cvec<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Random unimodular vector with phases uniform on (-pi, pi].
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let t: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            C64::from_polar(1.0, t)
        })
        .collect()
}
