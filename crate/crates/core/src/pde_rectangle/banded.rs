//! Symmetric banded storage and its Cholesky factorization.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix: row `p` stores columns
/// `p − bw ..= p` at offsets `0 ..= bw`.
#[derive(Clone, Debug)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBanded {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn slot(&self, p: usize, q: usize) -> usize {
        debug_assert!(q <= p && p - q <= self.bw);
        p * (self.bw + 1) + q + self.bw - p
    }

    /// Entry `(p, q)` with `q ≤ p`.
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.data[self.slot(p, q)]
    }

    /// Sets `(p, q)` and, implicitly, `(q, p)`. Requires `q ≤ p`.
    pub fn set(&mut self, p: usize, q: usize, v: f64) {
        let s = self.slot(p, q);
        self.data[s] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for p in 0..self.n {
            let lo = p.saturating_sub(self.bw);
            let row = &self.data[self.slot(p, lo)..=self.slot(p, p)];
            y[p] += dot(row, &x[lo..=p]);
            for (q, a) in (lo..p).zip(row) {
                y[q] += a * x[p];
            }
        }
        y
    }

    /// In-place Cholesky `A = L Lᵀ`; fails on a non-positive pivot.
    pub fn cholesky(mut self) -> Result<BandedCholesky> {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo_i = i.saturating_sub(self.bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(self.bw));
                let s_ij = self.slot(i, j);
                let li = &self.data[i * w + lo + self.bw - i..s_ij];
                let lj = &self.data[j * w + lo + self.bw - j..j * w + self.bw];
                let s = self.data[s_ij] - dot(li, lj);
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Validation(format!(
                            "matrix is not positive definite (pivot {i} is {s:e})"
                        )));
                    }
                    self.data[s_ij] = s.sqrt();
                } else {
                    self.data[s_ij] = s / self.data[j * w + self.bw];
                }
            }
        }
        Ok(BandedCholesky { l: self })
    }
}

#[derive(Clone, Debug)]
pub struct BandedCholesky {
    l: SymBanded,
}

impl BandedCholesky {
    pub fn len(&self) -> usize {
        self.l.n
    }

    pub fn is_empty(&self) -> bool {
        self.l.n == 0
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let l = &self.l;
        for i in 0..l.n {
            let lo = i.saturating_sub(l.bw);
            let row = &l.data[l.slot(i, lo)..l.slot(i, i)];
            b[i] = (b[i] - dot(row, &b[lo..i])) / l.get(i, i);
        }
        for i in (0..l.n).rev() {
            b[i] /= l.get(i, i);
            let xi = b[i];
            let lo = i.saturating_sub(l.bw);
            let row = &l.data[l.slot(i, lo)..l.slot(i, i)];
            for (bk, a) in b[lo..i].iter_mut().zip(row) {
                *bk -= a * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Dot product with four accumulators so the loop vectorizes.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}
