//! Cholesky factorization of symmetric positive definite band matrices.

use crate::error::{Error, Result};

/// Lower band storage: `band[i * (w + 1) + d]` holds `A[i][i - d]`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    /// Half bandwidth `w`: `A[i][j] = 0` whenever `|i - j| > w`.
    pub w: usize,
    band: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, w: usize) -> Self {
        Self { n, w, band: vec![0.0; n * (w + 1)] }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.w);
        i * (self.w + 1) + (i - j)
    }

    /// Adds `v` to `A[i][j]` (and, implicitly, `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(r, c);
        self.band[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.w {
            return 0.0;
        }
        self.band[self.idx(r, c)]
    }

    /// Clears row and column `i` and puts `1` on the diagonal.
    pub fn set_identity_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.w);
        for j in lo..i {
            let k = self.idx(i, j);
            self.band[k] = 0.0;
        }
        let hi = (i + self.w).min(self.n - 1);
        for r in i + 1..=hi {
            let k = self.idx(r, i);
            self.band[k] = 0.0;
        }
        let k = self.idx(i, i);
        self.band[k] = 1.0;
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.w);
            for j in lo..i {
                let a = self.band[self.idx(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.band[self.idx(i, i)] * x[i];
        }
        y
    }

    /// In-place `A = L Lᵀ`.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let w = self.w;
        for i in 0..self.n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                let mut s = self.band[self.idx(i, j)];
                let kl = lo.max(j.saturating_sub(w));
                for k in kl..j {
                    s -= self.band[self.idx(i, k)] * self.band[self.idx(j, k)];
                }
                let at = self.idx(i, j);
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::SolverDiverged { iterations: i, residual: s });
                    }
                    self.band[at] = s.sqrt();
                } else {
                    self.band[at] = s / self.band[self.idx(j, j)];
                }
            }
        }
        Ok(BandCholesky { l: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    l: BandMatrix,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let (n, w) = (l.n, l.w);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let mut s = y[i];
            for k in lo..i {
                s -= l.band[l.idx(i, k)] * y[k];
            }
            y[i] = s / l.band[l.idx(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + w).min(n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= l.band[l.idx(k, i)] * y[k];
            }
            y[i] = s / l.band[l.idx(i, i)];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve_pentadiagonal() {
        let n = 40;
        let mut a = BandMatrix::zeros(n, 2);
        for i in 0..n {
            a.add(i, i, 6.0);
            if i >= 1 {
                a.add(i, i - 1, -2.0);
            }
            if i >= 2 {
                a.add(i, i - 2, 0.5);
            }
        }
        let exact: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let b = a.mul(&exact);
        let x = a.clone().cholesky().unwrap().solve(&b);
        for (xi, ei) in x.iter().zip(&exact) {
            assert!((xi - ei).abs() < 1e-13);
        }
        assert_eq!(a.get(5, 3), 0.5);
        assert_eq!(a.get(3, 5), 0.5);
        assert_eq!(a.get(9, 3), 0.0);
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = BandMatrix::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        assert!(a.cholesky().is_err());
    }
}
