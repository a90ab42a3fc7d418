use nalgebra::DMatrix;

use super::SpectralDecomposition;
use crate::matrix::SymmetricMatrix;
use crate::semicircle::SpectralPoint;
use crate::{Error, Result, C64};

/// Resolvent `(W^{(J)} - zI)^{-1}` of the principal minor with the rows and
/// columns in `J` removed. Entries are addressed by original indices.
#[derive(Debug, Clone)]
pub struct ResolventSlice {
    z: SpectralPoint,
    n_full: usize,
    removed: Vec<usize>,
    /// original index -> position in `r`, `usize::MAX` for removed indices
    position: Vec<usize>,
    r: DMatrix<C64>,
}

impl ResolventSlice {
    pub fn z(&self) -> SpectralPoint {
        self.z
    }

    /// Size `n` of the full matrix.
    pub fn n_full(&self) -> usize {
        self.n_full
    }

    /// Size of the minor.
    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn kept(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_full).filter(|&k| self.position[k] != usize::MAX)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.position[k] != usize::MAX
    }

    /// `R_kl` for original indices `k, l` outside `J`.
    #[inline]
    pub fn get(&self, k: usize, l: usize) -> C64 {
        self.r[(self.position[k], self.position[l])]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.r
    }

    pub fn trace(&self) -> C64 {
        self.r.trace()
    }

    /// `m_n^{(J)} = n^{-1} Tr R^{(J)}`, normalised by the full size.
    pub fn stieltjes(&self) -> C64 {
        self.trace() / self.n_full as f64
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.r * v).iter().copied().collect()
    }
}

fn positions(n: usize, removed: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut removed = removed.to_vec();
    removed.sort_unstable();
    removed.dedup();
    if removed.iter().any(|&j| j >= n) {
        return Err(Error::InvalidParameter(format!("minor index out of range for n = {n}")));
    }
    let mut position = vec![usize::MAX; n];
    let mut next = 0;
    for (k, slot) in position.iter_mut().enumerate() {
        if removed.binary_search(&k).is_err() {
            *slot = next;
            next += 1;
        }
    }
    Ok((removed, position))
}

/// Direct resolvent of the minor `W^{(J)}` by complex LU inversion.
pub fn resolvent(w: &SymmetricMatrix, z: SpectralPoint, removed: &[usize]) -> Result<ResolventSlice> {
    let n = w.n();
    let (removed, position) = positions(n, removed)?;
    let (minor, _) = w.minor(&removed);
    let m = minor.n();
    let zc = z.z();
    let a = DMatrix::<C64>::from_fn(m, m, |i, j| {
        let x = C64::new(minor.get(i, j), 0.0);
        if i == j {
            x - zc
        } else {
            x
        }
    });
    let r = if m == 0 {
        a
    } else {
        a.lu()
            .try_inverse()
            .ok_or(Error::InvalidSpectralPoint(z.v()))?
    };
    Ok(ResolventSlice {
        z,
        n_full: n,
        removed,
        position,
        r,
    })
}

/// Full resolvent assembled from eigenpairs: `R = sum_k u_k u_k^T / (lambda_k - z)`.
pub fn resolvent_spectral(spec: &SpectralDecomposition, z: SpectralPoint) -> Result<ResolventSlice> {
    let n = spec.n();
    if !spec.has_vectors() {
        return Err(Error::InvalidParameter("spectral resolvent needs eigenvectors".into()));
    }
    let zc = z.z();
    let mut r = DMatrix::<C64>::zeros(n, n);
    for (j, &lam) in spec.eigenvalues().iter().enumerate() {
        let c = 1.0 / (C64::new(lam, 0.0) - zc);
        let u = spec.eigenvector(j).unwrap();
        for l in 0..n {
            let cl = c * u[l];
            for k in 0..n {
                r[(k, l)] += cl * u[k];
            }
        }
    }
    Ok(ResolventSlice {
        z,
        n_full: n,
        removed: Vec::new(),
        position: (0..n).collect(),
        r,
    })
}

/// Diagonal `R_jj(z)`, `j = 1..n`, from eigenpairs in `O(n^2)`.
pub fn resolvent_diagonal(spec: &SpectralDecomposition, z: SpectralPoint) -> Result<Vec<C64>> {
    if !spec.has_vectors() {
        return Err(Error::InvalidParameter("resolvent diagonal needs eigenvectors".into()));
    }
    let n = spec.n();
    let zc = z.z();
    let mut diag = vec![C64::new(0.0, 0.0); n];
    for (k, &lam) in spec.eigenvalues().iter().enumerate() {
        let c = 1.0 / (C64::new(lam, 0.0) - zc);
        for (d, u) in diag.iter_mut().zip(spec.eigenvector(k).unwrap()) {
            *d += c * (u * u);
        }
    }
    Ok(diag)
}

/// Empirical spectral distribution as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct Esd {
    sorted: Vec<f64>,
}

impl Esd {
    /// `mu_n((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&l| l <= x) as f64 / self.sorted.len() as f64
    }

    pub fn atoms(&self) -> &[f64] {
        &self.sorted
    }
}

pub fn esd(spec: &SpectralDecomposition) -> Esd {
    let mut sorted = spec.eigenvalues().to_vec();
    sorted.sort_by(f64::total_cmp);
    Esd { sorted }
}

/// `m_n(z) = n^{-1} sum_k 1/(lambda_k - z)`.
pub fn stieltjes_esd(eigenvalues: &[f64], z: SpectralPoint) -> C64 {
    let zc = z.z();
    let s: C64 = eigenvalues
        .iter()
        .map(|&l| 1.0 / (C64::new(l, 0.0) - zc))
        .sum();
    s / eigenvalues.len() as f64
}
