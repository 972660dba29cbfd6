use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::Dft;
use crate::{Error, C64};

/// Condition-number ceiling for the Gram matrix; beyond this the projector is
/// numerically meaningless and construction fails.
const MAX_GRAM_CONDITION: f64 = 1e12;

/// Factored orthogonal projector B onto the column space of A = Diag(s) F_check.
///
/// B = A (A^H A)^{-1} A^H is never materialized; an application costs two FFTs
/// plus an L x L triangular solve. The L x L Gram matrix
/// G = F_check^H Diag(|s|^2) F_check is Toeplitz and is assembled from a
/// single FFT of |s|^2, then factorized once by Cholesky.
pub struct ProjectorB {
    s: Vec<C64>,
    l: usize,
    dft: Dft,
    chol: Cholesky<C64, Dyn>,
}

impl ProjectorB {
    pub fn new(s: &[C64], l: usize) -> Result<Self, Error> {
        let n_c = s.len();
        if n_c == 0 {
            return Err(Error::EmptyInput);
        }
        if l == 0 || l >= n_c {
            return Err(Error::ChannelTooLong { l, n_c });
        }
        let dft = Dft::new(n_c)?;

        // G_{k,l} = (F|s|^2)_{(l-k) mod n} / sqrt(n), so one FFT gives every entry.
        let q: Vec<C64> = s.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
        let q_hat = dft.forward(&q);
        let scale = 1.0 / (n_c as f64).sqrt();
        let gram = DMatrix::from_fn(l, l, |k, m| q_hat[(n_c + m - k) % n_c] * scale);

        let eigs = gram.clone().symmetric_eigen().eigenvalues;
        let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 || max / min > MAX_GRAM_CONDITION {
            return Err(Error::SingularGram {
                cond: if min > 0.0 { max / min } else { f64::INFINITY },
            });
        }
        let chol = Cholesky::new(gram).ok_or(Error::SingularGram {
            cond: max / min.max(f64::MIN_POSITIVE),
        })?;

        Ok(Self {
            s: s.to_vec(),
            l,
            dft,
            chol,
        })
    }

    pub fn block_len(&self) -> usize {
        self.s.len()
    }

    pub fn channel_len(&self) -> usize {
        self.l
    }

    pub fn symbols(&self) -> &[C64] {
        &self.s
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    /// A^H v = F_check^H Diag(s)^H v, the first L coefficients of F^H (s* . v).
    pub fn analysis(&self, v: &[C64]) -> Result<Vec<C64>, Error> {
        if v.len() != self.s.len() {
            return Err(Error::DimensionMismatch {
                expected: self.s.len(),
                got: v.len(),
            });
        }
        let weighted: Vec<C64> = self.s.iter().zip(v).map(|(s, v)| s.conj() * v).collect();
        let full = self.dft.inverse(&weighted);
        Ok(full[..self.l].to_vec())
    }

    /// A z = s . (F_check z) for a length-L coefficient vector z.
    pub fn synthesis(&self, z: &[C64]) -> Result<Vec<C64>, Error> {
        if z.len() != self.l {
            return Err(Error::DimensionMismatch {
                expected: self.l,
                got: z.len(),
            });
        }
        let spread = self.dft.partial_forward(z)?;
        Ok(self.s.iter().zip(&spread).map(|(s, x)| s * x).collect())
    }

    /// G^{-1} rhs via the cached Cholesky factor.
    pub fn solve_gram(&self, rhs: &[C64]) -> Result<Vec<C64>, Error> {
        if rhs.len() != self.l {
            return Err(Error::DimensionMismatch {
                expected: self.l,
                got: rhs.len(),
            });
        }
        let solved = self.chol.solve(&DVector::from_column_slice(rhs));
        Ok(solved.iter().cloned().collect())
    }

    /// B v.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>, Error> {
        let coeffs = self.analysis(v)?;
        let solved = self.solve_gram(&coeffs)?;
        self.synthesis(&solved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn norm(a: &[C64]) -> f64 {
        a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn constant_modulus_closed_form() {
        // |s_k|^2 = c for all k makes the Gram c I_L, so B = (1/c) A A^H.
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let n = 32;
        let l = 5;
        let c: f64 = 3.0;
        let s: Vec<C64> = (0..n)
            .map(|_| {
                let t: f64 = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU);
                C64::from_polar(c.sqrt(), t)
            })
            .collect();
        let p = ProjectorB::new(&s, l).unwrap();
        for _ in 0..10 {
            let v = oracle::random_cvec(&mut rng, n);
            let got = p.apply(&v).unwrap();
            let coeffs = p.analysis(&v).unwrap();
            let scaled: Vec<C64> = coeffs.iter().map(|z| z / c).collect();
            let expect = p.synthesis(&scaled).unwrap();
            assert!(diff_norm(&got, &expect) <= 1e-10 * norm(&v).max(1.0));
        }
    }

    #[test]
    fn projector_fixes_its_range() {
        let mut rng = ChaCha12Rng::seed_from_u64(32);
        let n = 16;
        let l = 3;
        let s = vec![C64::new(1.0, 0.0); n];
        let p = ProjectorB::new(&s, l).unwrap();
        let z = oracle::random_cvec(&mut rng, l);
        let in_range = p.synthesis(&z).unwrap();
        let projected = p.apply(&in_range).unwrap();
        assert!(diff_norm(&projected, &in_range) <= 1e-10 * norm(&in_range));
    }

    #[test]
    fn matches_dense_projector_on_basis_vectors() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let n = 32;
        let l = 5;
        let s = oracle::random_cvec(&mut rng, n);
        let p = ProjectorB::new(&s, l).unwrap();
        let dense = oracle::dense_projector(&s, l);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let got = p.apply(&e).unwrap();
            let expect: Vec<C64> = (0..n).map(|i| dense[(i, j)]).collect();
            assert!(diff_norm(&got, &expect) <= 1e-10);
        }
    }

    #[test]
    fn idempotent_and_annihilates_complement() {
        let mut rng = ChaCha12Rng::seed_from_u64(34);
        for n in [32, 256] {
            for l in [1, 5, 10] {
                let s = oracle::random_cvec(&mut rng, n);
                let p = ProjectorB::new(&s, l).unwrap();
                let v = oracle::random_cvec(&mut rng, n);
                let bv = p.apply(&v).unwrap();
                let bbv = p.apply(&bv).unwrap();
                assert!(diff_norm(&bbv, &bv) <= 1e-10 * norm(&v).max(1.0));
                // v - Bv lies in the orthogonal complement.
                let resid: Vec<C64> = v.iter().zip(&bv).map(|(a, b)| a - b).collect();
                let proj_resid = p.apply(&resid).unwrap();
                assert!(norm(&proj_resid) <= 1e-9 * norm(&v).max(1.0));
            }
        }
    }

    #[test]
    fn dense_eigenvalues_are_zero_or_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(35);
        let n = 64;
        let l = 7;
        let s = oracle::random_cvec(&mut rng, n);
        let dense = oracle::dense_projector(&s, l);
        let eigs = dense.symmetric_eigen().eigenvalues;
        let mut near_one = 0;
        for ev in eigs.iter() {
            assert!(*ev >= -1e-9 && *ev <= 1.0 + 1e-9, "eigenvalue {ev}");
            assert!(ev.abs() <= 1e-8 || (ev - 1.0).abs() <= 1e-8, "eigenvalue {ev}");
            if (ev - 1.0).abs() <= 1e-8 {
                near_one += 1;
            }
        }
        assert_eq!(near_one, l);
    }

    #[test]
    fn singular_gram_is_rejected() {
        // Only one nonzero symbol with L = 2 leaves a rank-1 Gram.
        let n = 8;
        let mut s = vec![C64::new(0.0, 0.0); n];
        s[0] = C64::new(1.0, 0.0);
        assert!(matches!(
            ProjectorB::new(&s, 2),
            Err(Error::SingularGram { .. })
        ));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let s = vec![C64::new(1.0, 0.0); 8];
        let p = ProjectorB::new(&s, 2).unwrap();
        let v = vec![C64::new(1.0, 0.0); 7];
        assert!(p.apply(&v).is_err());
    }
}
