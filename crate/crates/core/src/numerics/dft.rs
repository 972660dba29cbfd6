use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::{Error, C64};

/// Planned unitary DFT of a fixed length.
///
/// Both directions carry the 1/sqrt(n) unitary scaling, so `forward` preserves
/// the l2 norm and `inverse` is its exact adjoint. The plan is immutable after
/// construction and safe to share across threads.
pub struct Dft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(n: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// F v with F the unitary DFT matrix, F_{k,n} = e^{-j2\pi kn/N} / sqrt(N).
    pub fn forward(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.n);
        let mut buf = v.to_vec();
        self.fwd.process(&mut buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        for z in &mut buf {
            *z *= scale;
        }
        buf
    }

    /// F^H v, the inverse of `forward`.
    pub fn inverse(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.n);
        let mut buf = v.to_vec();
        self.inv.process(&mut buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        for z in &mut buf {
            *z *= scale;
        }
        buf
    }

    /// The semi-unitary partial DFT: the length-l input is zero-padded to n
    /// and transformed, i.e. multiplication by the first l columns of F.
    pub fn partial_forward(&self, h: &[C64]) -> Result<Vec<C64>, Error> {
        if h.len() > self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: h.len(),
            });
        }
        let mut padded = vec![C64::new(0.0, 0.0); self.n];
        padded[..h.len()].copy_from_slice(h);
        Ok(self.forward(&padded))
    }
}

/// One-shot unitary DFT; plans on every call, so prefer [`Dft`] in loops.
pub fn unitary_dft(v: &[C64]) -> Result<Vec<C64>, Error> {
    Ok(Dft::new(v.len())?.forward(v))
}

/// One-shot unitary inverse DFT.
pub fn unitary_idft(v: &[C64]) -> Result<Vec<C64>, Error> {
    Ok(Dft::new(v.len())?.inverse(v))
}

/// F_check h: the n_c-point unitary DFT of h zero-padded to n_c.
pub fn apply_partial_dft(h: &[C64], n_c: usize) -> Result<Vec<C64>, Error> {
    if h.is_empty() {
        return Err(Error::EmptyInput);
    }
    Dft::new(n_c)?.partial_forward(h)
}
