use rand::Rng;
use serde::{Deserialize, Serialize};

use super::law::AtomTable;
use crate::{Error, Result};

/// A law with at most three atoms whose first four moments equal a target
/// sequence and whose support lies in `[-bound, bound]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedBoundedLaw {
    pub atoms: Vec<(f64, f64)>,
    pub bound: f64,
    pub target_moments: [f64; 4],
}

impl MatchedBoundedLaw {
    /// Re-evaluated `E X^k`, `k = 1..=4`.
    pub fn moments(&self) -> [f64; 4] {
        let mut m = [0.0; 4];
        for (x, p) in &self.atoms {
            let mut xp = *x;
            for mk in m.iter_mut() {
                *mk += p * xp;
                xp *= x;
            }
        }
        m
    }

    pub fn max_abs_atom(&self) -> f64 {
        self.atoms.iter().map(|(x, _)| x.abs()).fold(0.0, f64::max)
    }

    pub fn table(&self) -> AtomTable {
        AtomTable::new(&self.atoms)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.table().draw(rng)
    }
}

/// Solves `sum_i w_i x_i^k = m_k`, `k = 0..nodes.len()`, by Gaussian
/// elimination with partial pivoting.
fn vandermonde_weights(nodes: &[f64], moments: &[f64]) -> Option<Vec<f64>> {
    let m = nodes.len();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut row: Vec<f64> = nodes.iter().map(|x| x.powi(k as i32)).collect();
            row.push(moments[k]);
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in (col + 1)..m {
            let f = a[row][col] / a[col][col];
            for c in col..=m {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    let mut w = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = ((row + 1)..m).map(|c| a[row][c] * w[c]).sum();
        w[row] = (a[row][m] - s) / a[row][row];
    }
    Some(w)
}

/// Builds a law with at most three atoms matching `target = (m1, m2, m3, m4)`
/// and supported in `[-d, d]`.
///
/// Works in coordinates centred at `m1`: the two nodes are the roots of the
/// degree-two orthogonal polynomial of the measure `y dmu(y)`, and the centre
/// itself is the balancing third node.
pub fn match_bounded(target: [f64; 4], d: f64) -> Result<MatchedBoundedLaw> {
    if !(d > 0.0) || target.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad matching input {target:?}, D = {d}")));
    }
    let [m1, m2, m3, m4] = target;
    let mu2 = m2 - m1 * m1;
    let mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
    let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    let scale = 1.0 + m2.abs() + m4.abs();
    let hankel = mu2 * mu4 - mu3 * mu3 - mu2.powi(3);
    if mu2 < -1e-14 * scale || hankel < -1e-12 * scale * scale {
        return Err(Error::InfeasibleMoments(format!(
            "Hankel matrix of {target:?} is not positive semidefinite"
        )));
    }

    let atoms: Vec<(f64, f64)> = if mu2 <= 1e-14 * scale {
        if mu3.abs() > 1e-10 * scale || mu4.abs() > 1e-10 * scale {
            return Err(Error::InfeasibleMoments(format!("{target:?} has zero variance but nonzero higher moments")));
        }
        vec![(m1, 1.0)]
    } else {
        let a = -mu3 / mu2;
        let b = -(mu4 - mu3 * mu3 / mu2) / mu2;
        let disc = (a * a - 4.0 * b).max(0.0).sqrt();
        // b < 0 for feasible input, so q is never zero
        let sign = if a >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (a + sign * disc);
        let (y1, y2) = {
            let r1 = q;
            let r2 = b / q;
            if r1 < r2 {
                (r1, r2)
            } else {
                (r2, r1)
            }
        };
        let nodes = [y1, 0.0, y2];
        let w = vandermonde_weights(&nodes, &[1.0, 0.0, mu2])
            .ok_or_else(|| Error::InfeasibleMoments("singular moment system".into()))?;
        if w.iter().any(|&p| p < -1e-12) {
            return Err(Error::InfeasibleMoments(format!("negative weight in {w:?}")));
        }
        nodes
            .iter()
            .zip(&w)
            .filter(|(_, &p)| p > 1e-14)
            .map(|(y, &p)| (m1 + y, p))
            .collect()
    };
    let total: f64 = atoms.iter().map(|(_, p)| p).sum();
    let atoms: Vec<(f64, f64)> = atoms.into_iter().map(|(x, p)| (x, p / total)).collect();

    let law = MatchedBoundedLaw {
        atoms,
        bound: d,
        target_moments: target,
    };
    let needed = law.max_abs_atom();
    if needed > d * (1.0 + 1e-12) {
        return Err(Error::InsufficientBound { needed, bound: d });
    }
    Ok(law)
}
