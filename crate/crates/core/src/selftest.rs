//! Exact-identity suite run by the `selftest` command.
//!
//! Every check is deterministic given the seed: residuals of algebraic
//! identities that hold for any matrix, so a failure signals a defect rather
//! than bad luck.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{derive_seed, match_bounded, sample_wigner, EntryLaw};
use crate::quadrature::integrate;
use crate::semicircle::{b_of_z, cdf, quantiles, stieltjes_sc, SpectralPoint};
use crate::spectral::{
    eigendecompose, epsilon_decomposition_downdate, local_law_sample_from, resolvent, trace_difference_identity,
    ward_check,
};
use crate::{Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            cases: 0,
            max_residual: 0.0,
            tolerance,
        }
    }

    fn record(&mut self, residual: f64) {
        self.cases += 1;
        // NaN residuals must fail
        if !(residual <= self.max_residual) {
            self.max_residual = if residual.is_nan() { f64::INFINITY } else { residual };
        }
    }

    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn identities_checked(&self) -> usize {
        self.checks.iter().map(|c| c.cases).sum()
    }

    pub fn failures(&self) -> Vec<&IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

/// `∫ g_sc(λ)/(λ - z) dλ` with `λ = 2 sin θ`.
fn stieltjes_quadrature(z: C64) -> C64 {
    let f = |theta: f64| {
        let c = theta.cos();
        (2.0 / PI) * c * c / (C64::new(2.0 * theta.sin(), 0.0) - z)
    };
    let h = PI / 2.0;
    C64::new(
        integrate(|t| f(t).re, -h, h, 1e-13),
        integrate(|t| f(t).im, -h, h, 1e-13),
    )
}

const LAWS: [EntryLaw; 3] = [EntryLaw::Gaussian, EntryLaw::Rademacher, EntryLaw::StudentT { nu: 5.0 }];

/// Runs `cases` random `(W, z)` identity cases with `n <= max_n`, plus the
/// semicircle and moment-matching checks.
pub fn run_selftest(seed: u64, cases: usize, max_n: usize) -> Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut quad = IdentityCheck::new("stieltjes_vs_quadrature", 1e-8);
    let mut quadratic = IdentityCheck::new("m_sc_quadratic", 1e-12);
    let mut b_sq = IdentityCheck::new("b_squared", 1e-12);
    for _ in 0..100 {
        let z = SpectralPoint::new(rng.random_range(-3.0..3.0), rng.random_range(0.05..2.0))?;
        let m = stieltjes_sc(z);
        quad.record((m - stieltjes_quadrature(z.z())).norm());
        quadratic.record((m * m + z.z() * m + 1.0).norm());
        let b = b_of_z(z);
        b_sq.record((b * b - (z.z() * z.z() - 4.0)).norm());
    }
    let mut quant = IdentityCheck::new("quantile_inversion", 1e-10);
    let q = quantiles(1000);
    for j in 1..=1000 {
        quant.record((cdf(q.gamma(j)) - j as f64 / 1000.0).abs());
    }

    let mut eig = IdentityCheck::new("eigen_reconstruction", 1e-10);
    let mut ortho = IdentityCheck::new("eigen_orthonormality", 1e-10);
    let mut schur = IdentityCheck::new("schur_complement", 1e-8);
    let mut lambda = IdentityCheck::new("lambda_b_n_minus_t_n", 1e-8);
    let mut trace = IdentityCheck::new("trace_difference", 1e-8);
    let mut ward = IdentityCheck::new("ward_row_equality", 1e-8);
    let mut eps4 = IdentityCheck::new("eps4_bound_excess", 1e-12);
    let max_n = max_n.max(2);
    for case in 0..cases {
        let n = rng.random_range(2..=max_n);
        let law = &LAWS[case % LAWS.len()];
        let w = sample_wigner(law, n, derive_seed(seed, &[case as u64]))?.scaled();
        let z = SpectralPoint::new(rng.random_range(-2.5..2.5), rng.random_range(0.05..1.0))?;

        let spec = eigendecompose(&w)?;
        for k in 0..n {
            let u = spec.eigenvector(k).expect("vectors");
            let wu = w.mul_vec(u);
            let lam = spec.eigenvalues()[k];
            eig.record(wu.iter().zip(u).map(|(a, b)| (a - lam * b).abs()).fold(0.0, f64::max));
            for l in k..n {
                let dot: f64 = u.iter().zip(spec.eigenvector(l).expect("vectors")).map(|(a, b)| a * b).sum();
                ortho.record((dot - if k == l { 1.0 } else { 0.0 }).abs());
            }
        }

        let full = resolvent(&w, z, &[])?;
        let bound = 1.0 / (n as f64 * z.v());
        for j in 0..n {
            let e = epsilon_decomposition_downdate(&w, &full, j)?;
            schur.record(e.residual());
            eps4.record((e.eps4.norm() - bound).max(0.0));
        }
        lambda.record(local_law_sample_from(&w, &full)?.identity_residual);
        let j = rng.random_range(0..n);
        let t = trace_difference_identity(&w, j, z)?;
        trace.record((t.lhs - t.rhs1).norm().max((t.lhs - t.rhs2).norm()));
        ward.record(ward_check(&full).max_row_gap());
    }

    let mut matching = IdentityCheck::new("gaussian_moment_matching", 1e-12);
    let m = match_bounded([0.0, 1.0, 0.0, 3.0], 2.0)?;
    let expected = [(-(3f64.sqrt()), 1.0 / 6.0), (0.0, 2.0 / 3.0), (3f64.sqrt(), 1.0 / 6.0)];
    if m.atoms.len() == 3 {
        for ((x, p), (ex, ep)) in m.atoms.iter().zip(expected) {
            matching.record((x - ex).abs().max((p - ep).abs()));
        }
    } else {
        matching.record(f64::INFINITY);
    }

    Ok(SelftestReport {
        seed,
        checks: vec![
            quad, quadratic, b_sq, quant, eig, ortho, schur, lambda, trace, ward, eps4, matching,
        ],
    })
}
