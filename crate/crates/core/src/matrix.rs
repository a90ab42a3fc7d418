//! Dense real symmetric matrices stored in full row-major form.

use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds a matrix from the upper triangle produced by `f(j, k)`, `j <= k`.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for k in j..n {
                m.set(j, k, f(j, k));
            }
        }
        m
    }

    /// Builds a matrix from a full row-major array; returns `None` unless the
    /// array is exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Option<Self> {
        if data.len() != n * n {
            return None;
        }
        for j in 0..n {
            for k in (j + 1)..n {
                if data[j * n + k] != data[k * n + j] {
                    return None;
                }
            }
        }
        Some(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.n + k]
    }

    /// Sets both `(j, k)` and `(k, j)`.
    #[inline]
    pub fn set(&mut self, j: usize, k: usize, value: f64) {
        self.data[j * self.n + k] = value;
        self.data[k * self.n + j] = value;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|j| ((j + 1)..self.n).all(|k| self.get(j, k) == self.get(k, j)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Principal sub-matrix with the rows and columns in `removed` deleted.
    /// Returns the sub-matrix and the retained original indices.
    pub fn minor(&self, removed: &[usize]) -> (Self, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n).filter(|i| !removed.contains(i)).collect();
        let m = keep.len();
        let mut data = Vec::with_capacity(m * m);
        for &a in &keep {
            for &b in &keep {
                data.push(self.get(a, b));
            }
        }
        (Self { n: m, data }, keep)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Bitwise hash of the entries, used in diagnostics.
    pub fn content_hash(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.n.hash(&mut h);
        for x in &self.data {
            x.to_bits().hash(&mut h);
        }
        h.finish()
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}
