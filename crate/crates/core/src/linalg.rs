//! Banded storage and Gaussian elimination with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ModelError, Result};

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
///
/// Each row keeps an extra `kl` slots to the right of the band for the fill-in
/// produced by row interchanges.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku + self.kl {
            None
        } else {
            Some(i * self.width + j + self.kl - i)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let s = self.slot(i, j).expect("index out of bounds");
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = rhs`, consuming the matrix.
    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut b = rhs.to_vec();
        let reach = self.ku + self.kl;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let (mut pivot_row, mut pivot_abs) = (k, self.get(k, k).abs());
            for r in k + 1..=last_row {
                let v = self.get(r, k).abs();
                if v > pivot_abs {
                    pivot_row = r;
                    pivot_abs = v;
                }
            }
            if pivot_abs == 0.0 || !pivot_abs.is_finite() {
                return Err(ModelError::SingularSystem(k));
            }
            let last_col = (k + reach).min(n - 1);
            if pivot_row != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let c = self.get(pivot_row, j);
                    self.put(k, j, c);
                    self.put(pivot_row, j, a);
                }
                b.swap(k, pivot_row);
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last_row {
                let factor = self.get(r, k) / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.put(r, k, 0.0);
                for j in k + 1..=last_col {
                    let v = self.get(r, j) - factor * self.get(k, j);
                    self.put(r, j, v);
                }
                b[r] -= factor * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let s: f64 = (k + 1..=last_col).map(|j| self.get(k, j) * x[j]).sum();
            x[k] = (b[k] - s) / self.get(k, k);
        }
        Ok(x)
    }

    fn put(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("write outside band storage");
        self.data[s] = v;
    }
}
