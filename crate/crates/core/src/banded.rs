//! Banded matrices with an in-place LU factorization (no pivoting).
//!
//! The solver's Jacobians are diagonally dominant away from the seed cores
//! and only mildly indefinite inside them; pivots are checked against the
//! row scale and a tiny pivot is reported rather than silently used.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * self.width..(i + 1) * self.width];
            let mut s = 0.0;
            for j in j0..=j1 {
                s += row[j + self.kl - i] * x[j];
            }
            y[i] = s;
        }
    }

    /// Factors in place. Fails on a pivot below `1e-13` times the largest
    /// magnitude in its original row.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        let scale: Vec<f64> = (0..n)
            .map(|i| self.data[i * w..(i + 1) * w].iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        for k in 0..n {
            let piv = self.data[k * w + kl];
            if !(piv.abs() > 1e-13 * scale[k]) {
                return Err(Error::SingularPivot { row: k, pivot: piv });
            }
            let m = ku.min(n - 1 - k);
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let rk = &head[k * w + kl + 1..k * w + kl + 1 + m];
            for d in 1..=kl.min(n - 1 - k) {
                let row = &mut tail[(d - 1) * w..d * w];
                let l = row[kl - d] / piv;
                row[kl - d] = l;
                if l != 0.0 {
                    for (a, b) in row[kl + 1 - d..kl + 1 - d + m].iter_mut().zip(rk) {
                        *a -= l * b;
                    }
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku, w) = (self.m.n, self.m.kl, self.m.ku, self.m.width);
        let a = &self.m.data;
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let mut s = b[i];
            for j in j0..i {
                s -= a[i * w + j + kl - i] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let j1 = (i + ku).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=j1 {
                s -= a[i * w + j + kl - i] * b[j];
            }
            b[i] = s / a[i * w + kl];
        }
    }
}
