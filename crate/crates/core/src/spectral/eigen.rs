//! Symmetric eigensolver: Householder reduction to tridiagonal form followed
//! by implicit-shift QL iterations.

use serde::{Deserialize, Serialize};

use crate::matrix::SymmetricMatrix;
use crate::{Error, Result};

const MAX_SWEEPS_PER_VALUE: usize = 30;

/// Eigenvalues in ascending order and, optionally, the matching orthonormal
/// eigenvectors stored row-wise (`u_j` is row `j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    n: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: Option<Vec<f64>>,
}

impl SpectralDecomposition {
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Option<Vec<f64>>) -> Self {
        let n = eigenvalues.len();
        if let Some(v) = &eigenvectors {
            assert_eq!(v.len(), n * n);
        }
        Self {
            n,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn has_vectors(&self) -> bool {
        self.eigenvectors.is_some()
    }

    /// Coordinates `(u_{j1}, ..., u_{jn})` of the `j`-th eigenvector (0-based).
    pub fn eigenvector(&self, j: usize) -> Option<&[f64]> {
        self.eigenvectors
            .as_ref()
            .map(|v| &v[j * self.n..(j + 1) * self.n])
    }

    /// True when two eigenvalues are closer than `tol` (relative to the
    /// spectral radius).
    pub fn has_near_repeated(&self, tol: f64) -> bool {
        let scale = self
            .eigenvalues
            .iter()
            .fold(1e-300f64, |m, x| m.max(x.abs()));
        self.eigenvalues
            .windows(2)
            .any(|w| w[1] - w[0] <= tol * scale)
    }
}

/// Householder reduction `A = Q T Q^T`. Returns diagonal `d`, off-diagonal `e`
/// (`e[i] = T[i][i+1]`, `e[n-1] = 0`) and the reflectors `(tau_k, v_k)` where
/// `v_k` acts on indices `k+1..n` and has leading entry 1.
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
    reflectors: Vec<(f64, Vec<f64>)>,
}

fn tridiagonalize(w: &SymmetricMatrix, keep_reflectors: bool) -> Tridiagonal {
    let n = w.n();
    let mut a = w.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors = Vec::new();
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        d[k] = a[k * n + k];
        let m = n - k - 1;
        let x = &a[k * n + k + 1..(k + 1) * n];
        let alpha = x[0];
        let sigma: f64 = x[1..].iter().map(|t| t * t).sum();
        if sigma == 0.0 {
            e[k] = alpha;
            if keep_reflectors {
                reflectors.push((0.0, vec![0.0; m]));
            }
            continue;
        }
        let norm = (alpha * alpha + sigma).sqrt();
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let tau = (beta - alpha) / beta;
        let inv = 1.0 / (alpha - beta);
        let mut v = Vec::with_capacity(m);
        v.push(1.0);
        v.extend(x[1..].iter().map(|t| t * inv));
        e[k] = beta;

        // Only the upper triangle of the trailing block A22 (rows and
        // columns k+1..n) is read and written from here on.
        // p = tau * A22 v, one pass over the upper triangle
        let off = k + 1;
        p[..m].iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let row = &a[(off + i) * n + off + i..(off + i + 1) * n];
            let vi = v[i];
            let mut acc = row[0] * vi;
            for ((r, vj), pj) in row[1..].iter().zip(&v[i + 1..]).zip(p[i + 1..m].iter_mut()) {
                acc += r * vj;
                *pj += r * vi;
            }
            p[i] += acc;
        }
        for x in p[..m].iter_mut() {
            *x *= tau;
        }
        // w = p - (tau/2)(p.v) v
        let pv: f64 = p[..m].iter().zip(&v).map(|(s, t)| s * t).sum();
        let c = 0.5 * tau * pv;
        for i in 0..m {
            p[i] -= c * v[i];
        }
        // A22 <- A22 - v w^T - w v^T
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(off + i) * n + off + i..(off + i + 1) * n];
            for ((r, vj), wj) in row.iter_mut().zip(&v[i..]).zip(&p[i..m]) {
                *r -= vi * wj + wi * vj;
            }
        }
        if keep_reflectors {
            reflectors.push((tau, v));
        }
    }
    if n > 0 {
        d[n - 1] = a[n * n - 1];
    }
    Tridiagonal { d, e, reflectors }
}

/// Applies the plane rotation to rows `i` and `i + 1` of `zt`.
#[inline]
fn rotate_rows(zt: &mut [f64], n: usize, i: usize, c: f64, s: f64) {
    let (lo, hi) = zt.split_at_mut((i + 1) * n);
    let ri = &mut lo[i * n..];
    let rj = &mut hi[..n];
    for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
        let h = *y;
        *y = s * *x + c * h;
        *x = c * *x - s * h;
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. When `zt` is given its rows
/// are rotated along, so that on exit row `j` holds the eigenvector of `d[j]`
/// expressed in the input basis.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, hash: impl Fn() -> u64) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let mut total = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                total += 1;
                if iter > MAX_SWEEPS_PER_VALUE || total > MAX_SWEEPS_PER_VALUE * n {
                    return Err(Error::NoConvergence {
                        iterations: total,
                        hash: hash(),
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        rotate_rows(z, n, i, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Sorted eigenvalues of `w` without eigenvectors.
pub fn eigenvalues(w: &SymmetricMatrix) -> Result<Vec<f64>> {
    check_finite(w)?;
    let n = w.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let Tridiagonal { mut d, mut e, .. } = tridiagonalize(w, false);
    tql(&mut d, &mut e, None, || w.content_hash())?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Full eigendecomposition of `w`. Eigenvectors are normalised so that the
/// first coordinate with magnitude above `1e-8` is positive.
pub fn eigendecompose(w: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    check_finite(w)?;
    let n = w.n();
    if n == 0 {
        return Ok(SpectralDecomposition::from_parts(Vec::new(), Some(Vec::new())));
    }
    let Tridiagonal {
        mut d,
        mut e,
        reflectors,
    } = tridiagonalize(w, true);
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut zt), || w.content_hash())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (row, &src) in order.iter().enumerate() {
        let out = &mut vectors[row * n..(row + 1) * n];
        out.copy_from_slice(&zt[src * n..(src + 1) * n]);
        // back-transform: u = H_0 H_1 ... H_{n-3} s
        for (k, (tau, v)) in reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let tail = &mut out[k + 1..];
            let dot: f64 = tail.iter().zip(v).map(|(a, b)| a * b).sum();
            let c = tau * dot;
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= c * vi;
            }
        }
        if let Some(first) = out.iter().find(|x| x.abs() > 1e-8) {
            if *first < 0.0 {
                out.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    Ok(SpectralDecomposition::from_parts(values, Some(vectors)))
}

fn check_finite(w: &SymmetricMatrix) -> Result<()> {
    if w.as_slice().iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("matrix has non-finite entries".into()))
    }
}
