//! Semicircle distribution: density, distribution function, Stieltjes
//! transform, `b(z)`, the edge distance `kappa(u)` and the classical
//! eigenvalue locations `gamma_j`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// A point `z = u + iv` of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    u: f64,
    v: f64,
}

impl SpectralPoint {
    /// Rejects `v <= 0` and non-finite coordinates.
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() || !u.is_finite() {
            return Err(Error::InvalidSpectralPoint(v));
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn z(&self) -> C64 {
        C64::new(self.u, self.v)
    }
}

/// The region `{|u| <= u0, v0 <= v <= V}` with `v0 = A0 log^alpha(n) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDomain {
    pub u0: f64,
    pub v_max: f64,
    pub a0: f64,
    pub alpha: u32,
    pub n: usize,
}

impl SpectralDomain {
    pub fn new(u0: f64, v_max: f64, a0: f64, alpha: u32, n: usize) -> Result<Self> {
        if !(u0 > 0.0) || !(v_max > 0.0) || !(a0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain needs u0, V, A0 > 0 (got {u0}, {v_max}, {a0})"
            )));
        }
        if !(1..=2).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha must be 1 or 2, got {alpha}")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter("domain needs n >= 2".into()));
        }
        Ok(Self { u0, v_max, a0, alpha, n })
    }

    /// Lower resolution limit `v0 = A0 n^{-1} (ln n)^alpha`.
    pub fn v0(&self) -> f64 {
        lower_resolution(self.a0, self.alpha, self.n)
    }

    pub fn contains(&self, z: &SpectralPoint) -> bool {
        z.u().abs() <= self.u0 && z.v() >= self.v0() * (1.0 - 1e-12) && z.v() <= self.v_max * (1.0 + 1e-12)
    }

    /// Geometric v-grid from `V` down to `v0` with `per_decade` points per
    /// decade; both endpoints are included. Empty when `v0 > V`.
    pub fn v_grid(&self, per_decade: u32) -> Vec<f64> {
        geometric_grid(self.v0(), self.v_max, per_decade)
    }

    /// All grid points `(u, v)` for the given energies; energies outside
    /// `[-u0, u0]` are skipped.
    pub fn grid(&self, energies: &[f64], per_decade: u32) -> Vec<SpectralPoint> {
        let vs = self.v_grid(per_decade);
        energies
            .iter()
            .filter(|u| u.abs() <= self.u0)
            .flat_map(|&u| vs.iter().map(move |&v| SpectralPoint { u, v }))
            .collect()
    }
}

pub fn lower_resolution(a0: f64, alpha: u32, n: usize) -> f64 {
    let n = n as f64;
    a0 * n.ln().powi(alpha as i32) / n
}

pub(crate) fn geometric_grid(lo: f64, hi: f64, per_decade: u32) -> Vec<f64> {
    if lo > hi * (1.0 + 1e-12) {
        return Vec::new();
    }
    let decades = (hi / lo).log10();
    let steps = ((decades * per_decade.max(1) as f64).ceil() as usize).max(1);
    if decades <= 1e-12 {
        return vec![hi];
    }
    (0..=steps)
        .map(|i| {
            if i == steps {
                lo
            } else {
                hi * 10f64.powf(-decades * i as f64 / steps as f64)
            }
        })
        .collect()
}

/// Semicircle density `(2π)^{-1} sqrt((4 - λ²)_+)`.
pub fn density(lambda: f64) -> f64 {
    let r = 4.0 - lambda * lambda;
    if r <= 0.0 {
        0.0
    } else {
        r.sqrt() / (2.0 * PI)
    }
}

/// Semicircle distribution function, closed form on `[-2, 2]`.
pub fn cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    let value = 0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI;
    value.clamp(0.0, 1.0)
}

/// `sqrt(z² - 4)` on the branch cut `[-2, 2]`, behaving like `z` at infinity.
fn sqrt_z2_minus_4(z: C64) -> C64 {
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

/// Stieltjes transform of the semicircle law, the root of `m² + zm + 1 = 0`
/// with positive imaginary part.
pub fn stieltjes_sc(z: SpectralPoint) -> C64 {
    stieltjes_sc_at(z.z())
}

/// As [`stieltjes_sc`] for a raw complex argument with `Im z > 0`.
pub fn stieltjes_sc_at(z: C64) -> C64 {
    // -z/2 + sqrt(z²/4 - 1) rationalised to avoid cancellation for large |z|.
    -2.0 / (z + sqrt_z2_minus_4(z))
}

/// `b(z) = z + 2 m_sc(z)`, which equals `sqrt(z² - 4)`.
pub fn b_of_z(z: SpectralPoint) -> C64 {
    z.z() + 2.0 * stieltjes_sc(z)
}

/// Distance of the energy to the nearest spectral edge, `||u| - 2|`.
pub fn kappa(u: f64) -> f64 {
    (u.abs() - 2.0).abs()
}

/// Classical eigenvalue locations `G_sc(gamma_j) = j / n`, `j = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemicircleQuantiles {
    pub n: usize,
    pub gamma: Vec<f64>,
}

impl SemicircleQuantiles {
    /// 1-based access, `gamma(j)` for `1 <= j <= n`.
    pub fn gamma(&self, j: usize) -> f64 {
        self.gamma[j - 1]
    }
}

const QUANTILE_TOL: f64 = 1e-12;

/// Solves `G_sc(x) = p` for `p` in `[0, 1/2]` by bisection, bracketed with the
/// edge asymptotic `2 + x ~ (3πp/2)^{2/3}`.
fn lower_half_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    let seed = (1.5 * PI * p).powf(2.0 / 3.0);
    let mut lo = -2.0;
    let mut hi = (-2.0 + 2.0 * seed).min(0.0);
    if cdf(hi) < p {
        lo = hi;
        hi = 0.0;
    }
    while hi - lo > 0.25 * QUANTILE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Semicircle quantile function `G_sc^{-1}(p)`.
pub fn quantile(p: f64) -> f64 {
    if p >= 1.0 {
        2.0
    } else if p == 0.5 {
        0.0
    } else if p < 0.5 {
        lower_half_quantile(p)
    } else {
        -lower_half_quantile(1.0 - p)
    }
}

/// Classical locations for an `n`-point spectrum. `gamma_n = 2` exactly.
pub fn quantiles(n: usize) -> SemicircleQuantiles {
    let gamma = (1..=n)
        .map(|j| {
            if j == n {
                2.0
            } else if 2 * j == n {
                0.0
            } else if 2 * j < n {
                lower_half_quantile(j as f64 / n as f64)
            } else {
                -lower_half_quantile((n - j) as f64 / n as f64)
            }
        })
        .collect();
    SemicircleQuantiles { n, gamma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: ∫ g_sc(λ)/(λ - z) dλ with λ = 2 sin θ.
    fn stieltjes_by_quadrature(z: C64) -> C64 {
        let f = |theta: f64| {
            let c = theta.cos();
            (2.0 / PI) * c * c / (C64::new(2.0 * theta.sin(), 0.0) - z)
        };
        let h = PI / 2.0;
        let re = integrate(|t| f(t).re, -h, h, 1e-13);
        let im = integrate(|t| f(t).im, -h, h, 1e-13);
        C64::new(re, im)
    }

    #[test]
    fn density_examples() {
        assert!((density(0.0) - 1.0 / PI).abs() < 1e-15);
        assert!((density(0.0) - 0.318_309_886_2).abs() < 1e-10);
        assert_eq!(density(2.0), 0.0);
        assert_eq!(density(-2.0), 0.0);
        assert_eq!(density(3.5), 0.0);
        assert!((density(1.0) - 0.275_664_447_7).abs() < 1e-10);
    }

    #[test]
    fn cdf_examples() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(cdf(-2.0), 0.0);
        assert_eq!(cdf(2.0), 1.0);
        assert_eq!(cdf(-7.0), 0.0);
        let oracle = integrate(density, -2.0, 1.0, 1e-14);
        assert!((cdf(1.0) - oracle).abs() < 1e-10, "{} vs {}", cdf(1.0), oracle);
    }

    #[test]
    fn cdf_derivative_matches_density() {
        let h = 1e-5;
        for i in 1..200 {
            let x = -1.99 + 3.98 * i as f64 / 200.0;
            let d = (cdf(x + h) - cdf(x - h)) / (2.0 * h);
            assert!((d - density(x)).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn stieltjes_at_i() {
        let z = SpectralPoint::new(0.0, 1.0).unwrap();
        let m = stieltjes_sc(z);
        let oracle = stieltjes_by_quadrature(z.z());
        assert!((m - oracle).norm() < 1e-10);
        let expected = C64::new(0.0, (5f64.sqrt() - 1.0) / 2.0);
        assert!((m - expected).norm() < 1e-14);
        assert!((m.im - 0.618_033_988_7).abs() < 1e-10);
    }

    #[test]
    fn stieltjes_matches_quadrature_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u = rng.random_range(-3.0..3.0);
            let v = rng.random_range(0.05..2.0);
            let z = SpectralPoint::new(u, v).unwrap();
            let err = (stieltjes_sc(z) - stieltjes_by_quadrature(z.z())).norm();
            assert!(err < 1e-8, "z = {u} + {v}i, err = {err:e}");
        }
    }

    #[test]
    fn stieltjes_decays_far_away() {
        for &u in &[1e3, -1e3, 1e6, -1e6] {
            let m = stieltjes_sc(SpectralPoint::new(u, 0.1).unwrap());
            assert!(m.norm() < 2.0 / u.abs());
            assert!(m.im > 0.0);
        }
    }

    #[test]
    fn b_at_i() {
        let z = SpectralPoint::new(0.0, 1.0).unwrap();
        let b = b_of_z(z);
        assert!((b - C64::new(0.0, 5f64.sqrt())).norm() < 1e-14);
        assert!((b * b + 5.0).norm() < 1e-12);
    }

    #[test]
    fn b_squared_identity_on_grid() {
        for i in 0..10 {
            for k in 0..10 {
                let u = -3.0 + 6.0 * i as f64 / 9.0;
                let v = 0.001 * 10f64.powf(3.0 * k as f64 / 9.0);
                let z = SpectralPoint::new(u, v).unwrap();
                let b = b_of_z(z);
                let zc = z.z();
                assert!((b * b - (zc * zc - 4.0)).norm() < 1e-12, "z = {zc}");
            }
        }
    }

    #[test]
    fn b_and_im_m_edge_ratios_are_bounded() {
        // |b| ≍ sqrt(kappa + v) for |u| <= u0 and Im m_sc ≍ v / sqrt(kappa + v)
        // outside the bulk; the constants are not pinned, so the ratios are
        // checked to stay inside a fixed band.
        let u0 = 4.0;
        let (mut b_lo, mut b_hi) = (f64::INFINITY, 0f64);
        let (mut m_lo, mut m_hi) = (f64::INFINITY, 0f64);
        for i in 0..=80 {
            let u = -u0 + 2.0 * u0 * i as f64 / 80.0;
            for k in 0..=30 {
                let v = 1e-4 * 10f64.powf(4.0 * k as f64 / 30.0);
                let z = SpectralPoint::new(u, v).unwrap();
                let scale = (kappa(u) + v).sqrt();
                let r = b_of_z(z).norm() / scale;
                b_lo = b_lo.min(r);
                b_hi = b_hi.max(r);
                if u.abs() >= 2.0 {
                    let r = stieltjes_sc(z).im / (v / scale);
                    m_lo = m_lo.min(r);
                    m_hi = m_hi.max(r);
                }
            }
        }
        assert!(b_lo > 0.3 && b_hi < 4.0, "b ratio in [{b_lo}, {b_hi}]");
        assert!(m_lo > 0.05 && m_hi < 2.0, "Im m ratio in [{m_lo}, {m_hi}]");
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(3.0), 1.0);
        assert_eq!(kappa(0.0), 2.0);
        assert_eq!(kappa(-2.0), 0.0);
        assert_eq!(kappa(2.0), 0.0);
    }

    #[test]
    fn quantile_examples() {
        let q = quantiles(10);
        assert_eq!(q.gamma(5), 0.0);
        assert_eq!(q.gamma(10), 2.0);

        let q = quantiles(100);
        let x = 0.01;
        // Brute-force oracle for the first location: bisection on the
        // quadrature CDF.
        let (mut lo, mut hi) = (-2.0, 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if integrate(density, -2.0, mid, 1e-15) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((q.gamma(1) - oracle).abs() < 1e-9);
        // Edge asymptotic: 2 + gamma_1 ≍ x^{2/3}.
        let ratio = (2.0 + q.gamma(1)) / x.powf(2.0 / 3.0);
        assert!(ratio > 2.0 && ratio < 3.0, "ratio {ratio}");
    }

    #[test]
    fn quantile_inversion_n1000() {
        let n = 1000;
        let q = quantiles(n);
        for j in 1..=n {
            let err = (cdf(q.gamma(j)) - j as f64 / n as f64).abs();
            assert!(err < 1e-10, "j = {j}, err = {err:e}");
            if j > 1 {
                assert!(q.gamma(j) >= q.gamma(j - 1));
            }
        }
    }

    #[test]
    fn domain_grid_respects_bounds() {
        let d = SpectralDomain::new(2.5, 1.0, 8.0, 2, 1024).unwrap();
        let pts = d.grid(&[-3.0, 0.0, 1.0, 2.5], 8);
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(d.contains(p), "{p:?}");
        }
        let vs = d.v_grid(8);
        assert_eq!(vs[0], 1.0);
        assert_eq!(*vs.last().unwrap(), d.v0());
    }

    #[test]
    fn rejects_nonpositive_v() {
        assert!(SpectralPoint::new(0.0, 0.0).is_err());
        assert!(SpectralPoint::new(0.0, -1.0).is_err());
        assert!(SpectralPoint::new(0.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn fixed_point_identity(u in -5.0f64..5.0, lv in -4.0f64..1.0) {
            let z = SpectralPoint::new(u, 10f64.powf(lv)).unwrap();
            let m = stieltjes_sc(z);
            let zc = z.z();
            prop_assert!((m * m + zc * m + 1.0).norm() < 1e-12);
            prop_assert!(m.im > 0.0);
        }

        #[test]
        fn cdf_is_monotone(a in -3.0f64..3.0, d in 0.0f64..1.0) {
            prop_assert!(cdf(a + d) >= cdf(a));
        }
    }
}
