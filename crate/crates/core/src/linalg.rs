//! Banded LU without pivoting, for diagonally dominant systems.

use crate::error::{Error, Result};

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    /// Row-major; row `i` holds columns `i - lower ..= i + upper + lower`.
    /// The extra `lower` columns absorb fill-in from elimination.
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (2 * lower + upper + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        2 * self.lower + self.upper + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.lower as isize;
        if off < 0 || off >= self.width() as isize || j >= self.n {
            None
        } else {
            Some(i * self.width() + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` at `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let limit_ok = j + self.lower >= i && j <= i + self.upper;
        assert!(limit_ok, "entry ({i},{j}) outside band");
        let k = self.slot(i, j).expect("inside band");
        self.data[k] += v;
    }

    /// Solves `A x = b` in place of a copy; `A` is consumed by the factorisation.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        let n = self.n;
        for k in 0..n {
            let pivot = self.get(k, k);
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem { pivot: k });
            }
            let last_row = (k + self.lower).min(n - 1);
            let last_col = (k + self.upper + self.lower).min(n - 1);
            for i in k + 1..=last_row {
                let factor = self.get(i, k) / pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let v = self.get(k, j);
                    if v != 0.0 {
                        let s = self.slot(i, j).expect("fill stays inside band");
                        self.data[s] -= factor * v;
                    }
                }
                x[i] -= factor * x[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.upper + self.lower).min(n - 1);
            let mut s = x[k];
            for (j, xj) in x.iter().enumerate().take(last_col + 1).skip(k + 1) {
                s -= self.get(k, j) * xj;
            }
            x[k] = s / self.get(k, k);
        }
        Ok(x)
    }
}
