//! Exact algebraic identities around the diagonal resolvent entries.

use serde::Serialize;

use super::resolvent::{resolvent, ResolventSlice};
use crate::matrix::SymmetricMatrix;
use crate::semicircle::{b_of_z, stieltjes_sc, SpectralPoint};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Decomposition `R_jj = -1 / (z + m_n - eps_j)` with
/// `eps_j = eps1 + eps2 + eps3 + eps4 (+ eps5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonDecomposition {
    pub j: usize,
    pub z: C64,
    /// `X_jj / sqrt(n)`
    pub eps1: C64,
    /// `-(1/n) sum_{k != l} X_jk X_jl R^{(j)}_kl`
    pub eps2: C64,
    /// `-(1/n) sum_k (X_jk^2 - sigma_jk^2) R^{(j)}_kk`
    pub eps3: C64,
    /// `(1/n)(Tr R - Tr R^{(j)})`
    pub eps4: C64,
    /// `(1/n) sum_k (1 - sigma_jk^2) R^{(j)}_kk`, present for conditioned entries
    pub eps5: Option<C64>,
    pub r_jj: C64,
    pub m_n: C64,
}

impl EpsilonDecomposition {
    pub fn eps(&self) -> C64 {
        self.eps1 + self.eps2 + self.eps3 + self.eps4 + self.eps5.unwrap_or(ZERO)
    }

    /// `|R_jj (z + m_n - eps_j) + 1|`.
    pub fn residual(&self) -> f64 {
        (self.r_jj * (self.z + self.m_n - self.eps()) + 1.0).norm()
    }
}

/// Shared assembly given access to `R^{(j)}` through `minor(k, l)`.
fn assemble<F, S>(
    w: &SymmetricMatrix,
    j: usize,
    full: &ResolventSlice,
    minor: F,
    sigma_sq: Option<S>,
) -> EpsilonDecomposition
where
    F: Fn(usize, usize) -> C64,
    S: Fn(usize, usize) -> f64,
{
    let n = w.n();
    let nf = n as f64;
    let row = w.row(j);
    let mut eps2 = ZERO;
    let mut eps3 = ZERO;
    let mut eps5 = ZERO;
    let mut minor_trace = ZERO;
    for k in (0..n).filter(|&k| k != j) {
        let rkk = minor(k, k);
        minor_trace += rkk;
        let s2 = sigma_sq.as_ref().map_or(1.0, |f| f(j, k));
        // w_jk^2 = X_jk^2 / n
        eps3 -= rkk * (row[k] * row[k] - s2 / nf);
        eps5 += rkk * ((1.0 - s2) / nf);
        let mut acc = ZERO;
        for l in (0..n).filter(|&l| l != j && l != k) {
            acc += minor(k, l) * row[l];
        }
        eps2 -= acc * row[k];
    }
    let trace = full.trace();
    EpsilonDecomposition {
        j,
        z: full.z().z(),
        eps1: C64::new(row[j], 0.0),
        eps2,
        eps3,
        eps4: (trace - minor_trace) / nf,
        eps5: sigma_sq.map(|_| eps5),
        r_jj: full.get(j, j),
        m_n: trace / nf,
    }
}

fn check_index(w: &SymmetricMatrix, j: usize) -> Result<()> {
    if j >= w.n() {
        return Err(Error::InvalidParameter(format!("index {j} out of range for n = {}", w.n())));
    }
    Ok(())
}

/// `eps_j` from the row `W_{j.}` and the minor resolvent `R^{(j)}` obtained by
/// direct inversion of the minor.
pub fn epsilon_decomposition(w: &SymmetricMatrix, j: usize, z: SpectralPoint) -> Result<EpsilonDecomposition> {
    check_index(w, j)?;
    let full = resolvent(w, z, &[])?;
    let minor = resolvent(w, z, &[j])?;
    Ok(assemble(w, j, &full, |k, l| minor.get(k, l), None::<fn(usize, usize) -> f64>))
}

/// Variant for entries with variances `sigma_sq(j, k)` different from one;
/// the defect is collected in `eps5`.
pub fn epsilon_decomposition_conditioned<S>(
    w: &SymmetricMatrix,
    j: usize,
    z: SpectralPoint,
    sigma_sq: S,
) -> Result<EpsilonDecomposition>
where
    S: Fn(usize, usize) -> f64,
{
    check_index(w, j)?;
    let full = resolvent(w, z, &[])?;
    let minor = resolvent(w, z, &[j])?;
    Ok(assemble(w, j, &full, |k, l| minor.get(k, l), Some(sigma_sq)))
}

/// `eps_j` from the full resolvent only, using the rank-one downdate
/// `R^{(j)}_kl = R_kl - R_kj R_jl / R_jj`.
pub fn epsilon_decomposition_downdate(w: &SymmetricMatrix, full: &ResolventSlice, j: usize) -> Result<EpsilonDecomposition> {
    check_index(w, j)?;
    if !full.removed().is_empty() || full.n_full() != w.n() {
        return Err(Error::InvalidParameter("downdate needs the full resolvent of w".into()));
    }
    let rjj = full.get(j, j);
    let minor = |k: usize, l: usize| full.get(k, l) - full.get(k, j) * full.get(j, l) / rjj;
    Ok(assemble(w, j, full, minor, None::<fn(usize, usize) -> f64>))
}

/// Per-point local-law quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalLawSample {
    pub u: f64,
    pub v: f64,
    pub m_n: C64,
    pub m_sc: C64,
    /// `m_n - m_sc`
    pub lambda: C64,
    pub b: C64,
    /// `b + Lambda_n`
    pub b_n: C64,
    /// `(1/n) sum_j eps_j R_jj`
    pub t_n: C64,
    /// `|Lambda_n b_n - T_n|`
    pub identity_residual: f64,
    /// `min(|T_n| / |b|, sqrt(|T_n|))`
    pub bound_form: f64,
}

impl LocalLawSample {
    fn new(z: SpectralPoint, m_n: C64, t_n: C64) -> Self {
        let m_sc = stieltjes_sc(z);
        let lambda = m_n - m_sc;
        let b = b_of_z(z);
        let b_n = b + lambda;
        let tn = t_n.norm();
        Self {
            u: z.u(),
            v: z.v(),
            m_n,
            m_sc,
            lambda,
            b,
            b_n,
            t_n,
            identity_residual: (lambda * b_n - t_n).norm(),
            bound_form: (tn / b.norm()).min(tn.sqrt()),
        }
    }
}

/// Full route: `T_n` summed from the per-index decompositions.
pub fn local_law_sample(w: &SymmetricMatrix, z: SpectralPoint) -> Result<LocalLawSample> {
    let full = resolvent(w, z, &[])?;
    local_law_sample_from(w, &full)
}

pub fn local_law_sample_from(w: &SymmetricMatrix, full: &ResolventSlice) -> Result<LocalLawSample> {
    let n = w.n();
    let mut t = ZERO;
    for j in 0..n {
        let e = epsilon_decomposition_downdate(w, full, j)?;
        t += e.eps() * e.r_jj;
    }
    Ok(LocalLawSample::new(full.z(), full.stieltjes(), t / n as f64))
}

/// Cheap route from eigenvalues: `m_n` by summation and `T_n` through the
/// identity `T_n = 1 + m_n (z + m_n)`, which follows from
/// `eps_j = z + m_n + 1/R_jj`.
pub fn local_law_from_eigenvalues(eigenvalues: &[f64], z: SpectralPoint) -> LocalLawSample {
    let m_n = super::stieltjes_esd(eigenvalues, z);
    let t_n = 1.0 + m_n * (z.z() + m_n);
    LocalLawSample::new(z, m_n, t_n)
}

/// Both sides of `Tr R - Tr R^{(j)} = (1 + eta_j) R_jj = R_jj^{-1} dR_jj/dz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceDifference {
    pub lhs: C64,
    pub rhs1: C64,
    /// derivative form `(R^2)_jj / R_jj`
    pub rhs2: C64,
    /// `(1/n) Tr (R^{(j)})^2`
    pub eta0: C64,
    /// off-diagonal part of the quadratic form
    pub eta1: C64,
    /// `(1/n) sum_k (X_jk^2 - 1) [(R^{(j)})^2]_kk`
    pub eta2: C64,
    /// quadratic form `(1/n) sum_{k,l} X_jk X_jl [(R^{(j)})^2]_kl`
    pub eta: C64,
}

pub fn trace_difference_identity(w: &SymmetricMatrix, j: usize, z: SpectralPoint) -> Result<TraceDifference> {
    check_index(w, j)?;
    let n = w.n();
    let nf = n as f64;
    let full = resolvent(w, z, &[])?;
    let minor = resolvent(w, z, &[j])?;
    let sq = minor.matrix() * minor.matrix();
    let kept: Vec<usize> = minor.kept().collect();
    let row = w.row(j);

    let mut eta0 = ZERO;
    let mut eta1 = ZERO;
    let mut eta2 = ZERO;
    let mut eta = ZERO;
    for (a, &k) in kept.iter().enumerate() {
        for (b, &l) in kept.iter().enumerate() {
            let term = sq[(a, b)] * (row[k] * row[l]);
            eta += term;
            if a == b {
                eta0 += sq[(a, a)] / nf;
                eta2 += sq[(a, a)] * (row[k] * row[k] - 1.0 / nf);
            } else {
                eta1 += term;
            }
        }
    }
    let rjj = full.get(j, j);
    let lhs = full.trace() - minor.trace();
    // dR_jj/dz = (R^2)_jj
    let m = full.matrix();
    let derivative: C64 = (0..n).map(|k| m[(j, k)] * m[(k, j)]).sum();
    Ok(TraceDifference {
        lhs,
        rhs1: (1.0 + eta) * rjj,
        rhs2: derivative / rjj,
        eta0,
        eta1,
        eta2,
        eta,
    })
}

/// Ward identity audit: `sum_k |R_kl|^2` against `Im R_ll / v` per row, and
/// `(1/n) sum_{k,l} |R_kl|^2` against `Im m_n^{(J)} / v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WardCheck {
    pub row_lhs: Vec<f64>,
    pub row_rhs: Vec<f64>,
    pub total_lhs: f64,
    pub total_rhs: f64,
}

impl WardCheck {
    pub fn max_row_gap(&self) -> f64 {
        self.row_lhs
            .iter()
            .zip(&self.row_rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether every row and the total satisfy `lhs <= rhs` up to `tol`.
    pub fn inequality_holds(&self, tol: f64) -> bool {
        self.row_lhs
            .iter()
            .zip(&self.row_rhs)
            .all(|(a, b)| *a <= b + tol)
            && self.total_lhs <= self.total_rhs + tol
    }
}

pub fn ward_check(r: &ResolventSlice) -> WardCheck {
    let v = r.z().v();
    let m = r.matrix();
    let dim = r.dim();
    let mut row_lhs = Vec::with_capacity(dim);
    let mut row_rhs = Vec::with_capacity(dim);
    for l in 0..dim {
        row_lhs.push((0..dim).map(|k| m[(k, l)].norm_sqr()).sum());
        row_rhs.push(m[(l, l)].im / v);
    }
    let n = r.n_full() as f64;
    WardCheck {
        total_lhs: row_lhs.iter().sum::<f64>() / n,
        total_rhs: r.stieltjes().im / v,
        row_lhs,
        row_rhs,
    }
}
