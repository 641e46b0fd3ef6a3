//! Banded LU factorization without pivoting, for diagonally dominant M-matrices.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.at(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.at(i, j)]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.at(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// In-place Doolittle factorization.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        for k in 0..n {
            let piv = self.data[self.at(k, k)];
            if piv.abs() < 1e-300 || !piv.is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {k}")));
            }
            let imax = (k + self.kl).min(n - 1);
            let jmax = (k + self.ku).min(n - 1);
            for i in k + 1..=imax {
                let ik = self.at(i, k);
                if self.data[ik] == 0.0 {
                    continue;
                }
                let l = self.data[ik] / piv;
                self.data[ik] = l;
                for j in k + 1..=jmax {
                    let kj = self.data[self.at(k, j)];
                    if kj != 0.0 {
                        let ij = self.at(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = &self.m;
        let n = m.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(m.kl);
            let mut s = x[i];
            for j in lo..i {
                s -= m.data[m.at(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + m.ku).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= m.data[m.at(i, j)] * x[j];
            }
            x[i] = s / m.data[m.at(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_system() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x);
        let y = a.factor().unwrap().solve(&b);
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-10);
        }
    }
}
