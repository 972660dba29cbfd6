use crate::{Error, C64};

/// Piecewise-constant transformation: the N_c x N block-of-ones matrix that
/// maps a reduced phase vector to full length by holding each entry over a
/// block of N_s = N_c / N samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PctTransform {
    n_c: usize,
    n: usize,
    n_s: usize,
}

impl PctTransform {
    pub fn new(n_c: usize, n: usize) -> Result<Self, Error> {
        if n == 0 || n_c == 0 || n_c % n != 0 {
            return Err(Error::NonDivisor { n_c, n });
        }
        Ok(Self {
            n_c,
            n,
            n_s: n_c / n,
        })
    }

    pub fn full_len(&self) -> usize {
        self.n_c
    }

    pub fn reduced_len(&self) -> usize {
        self.n
    }

    /// Block size N_s; also the largest eigenvalue of T^H T.
    pub fn block_size(&self) -> usize {
        self.n_s
    }

    /// T x: repeat each reduced entry N_s times.
    pub fn expand(&self, reduced: &[C64]) -> Result<Vec<C64>, Error> {
        if reduced.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: reduced.len(),
            });
        }
        let mut out = Vec::with_capacity(self.n_c);
        for &z in reduced {
            out.extend(std::iter::repeat(z).take(self.n_s));
        }
        Ok(out)
    }

    /// T^H z: sum within each block.
    pub fn adjoint(&self, full: &[C64]) -> Result<Vec<C64>, Error> {
        if full.len() != self.n_c {
            return Err(Error::DimensionMismatch {
                expected: self.n_c,
                got: full.len(),
            });
        }
        Ok(full.chunks(self.n_s).map(|c| c.iter().sum()).collect())
    }
}
