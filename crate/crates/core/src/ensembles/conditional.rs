use rand::Rng;
use rand_distr::Distribution;

use super::law::{AtomTable, LawSampler};
use super::EntryLaw;
use crate::{Error, Result};

pub const REJECTION_CAP: usize = 1_000_000;

/// `n^{1/4} * r_under`, the level separating small from large entries.
pub fn small_threshold(n: usize, r_under: f64) -> f64 {
    (n as f64).powf(0.25) * r_under
}

/// `sqrt(n) / r_over`, the truncation level.
pub fn truncation_threshold(n: usize, r_over: f64) -> f64 {
    (n as f64).sqrt() / r_over
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `|x| <= bound`
    Small { bound: f64 },
    /// `lo < |x| <= hi`
    Annulus { lo: f64, hi: f64 },
}

impl Region {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Region::Small { bound } => x.abs() <= bound,
            Region::Annulus { lo, hi } => x.abs() > lo && x.abs() <= hi,
        }
    }
}

#[derive(Debug, Clone)]
enum Draw {
    Table(AtomTable),
    Rejection(LawSampler),
    InverseTail { tail_lo: f64, tail_hi: f64 },
}

/// An entry law conditioned on `|X|` falling in a region.
#[derive(Debug, Clone)]
pub struct ConditionalLaw {
    base: EntryLaw,
    region: Region,
    mass: f64,
    draw: Draw,
}

fn discrete_atoms(law: &EntryLaw) -> Option<Vec<(f64, f64)>> {
    match law {
        EntryLaw::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
        EntryLaw::Atoms { atoms } => Some(atoms.clone()),
        _ => None,
    }
}

impl ConditionalLaw {
    /// `law` conditioned on `|X| <= bound`.
    pub fn small(law: &EntryLaw, bound: f64) -> Result<Self> {
        let region = Region::Small { bound };
        let mass = 1.0 - law.abs_tail(bound);
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!("no mass in |x| <= {bound}")));
        }
        let draw = match discrete_atoms(law) {
            Some(atoms) => Draw::Table(restricted(&atoms, region)),
            None => Draw::Rejection(law.sampler()?),
        };
        Ok(Self {
            base: law.clone(),
            region,
            mass,
            draw,
        })
    }

    /// `law` conditioned on `lo < |X| <= hi`.
    pub fn annulus(law: &EntryLaw, lo: f64, hi: f64) -> Result<Self> {
        law.validate()?;
        let region = Region::Annulus { lo, hi };
        let mass = law.annulus_probability(lo, hi);
        if !(mass > 0.0) {
            return Err(Error::ZeroAnnulusMass { lo, hi });
        }
        let draw = match discrete_atoms(law) {
            Some(atoms) => Draw::Table(restricted(&atoms, region)),
            None => Draw::InverseTail {
                tail_lo: law.abs_tail(lo),
                tail_hi: law.abs_tail(hi),
            },
        };
        Ok(Self {
            base: law.clone(),
            region,
            mass,
            draw,
        })
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn base(&self) -> &EntryLaw {
        &self.base
    }

    /// Probability of the conditioning event under the base law.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Conditional moments `E[X^k | region]`, `k = 1..=4`.
    pub fn moments(&self) -> [f64; 4] {
        let partial = |k: u32| match self.region {
            Region::Small { bound } => self.base.truncated_moment(k, bound),
            Region::Annulus { lo, hi } => self.base.tail_moment(k, lo) - self.base.tail_moment(k, hi),
        };
        [1, 2, 3, 4].map(|k| partial(k) / self.mass)
    }

    pub fn variance(&self) -> f64 {
        let m = self.moments();
        m[1] - m[0] * m[0]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match &self.draw {
            Draw::Table(table) => Ok(table.draw(rng)),
            Draw::Rejection(sampler) => {
                for _ in 0..REJECTION_CAP {
                    let x = sampler.sample(rng);
                    if self.region.contains(x) {
                        return Ok(x);
                    }
                }
                Err(Error::RejectionExhausted(REJECTION_CAP))
            }
            Draw::InverseTail { tail_lo, tail_hi } => {
                let Region::Annulus { lo, hi } = self.region else {
                    unreachable!()
                };
                let u: f64 = rng.random();
                let target = tail_hi + u * (tail_lo - tail_hi);
                let mut x = self.base.inverse_abs_tail(target, lo, hi);
                if x <= lo {
                    x = lo.next_up();
                }
                let x = x.min(hi);
                Ok(if rng.random::<bool>() { x } else { -x })
            }
        }
    }
}

fn restricted(atoms: &[(f64, f64)], region: Region) -> AtomTable {
    let kept: Vec<(f64, f64)> = atoms
        .iter()
        .copied()
        .filter(|(x, p)| *p > 0.0 && region.contains(*x))
        .collect();
    AtomTable::new(&kept)
}

/// The pair of conditioned laws used to build `X(L)`.
#[derive(Debug, Clone)]
pub struct ConditionalLaws {
    pub small: ConditionalLaw,
    pub large: ConditionalLaw,
    /// `P(n^{1/4} r_under < |X| <= sqrt(n) / r_over)`.
    pub p_n: f64,
}

/// Splits `law` at `n^{1/4} r_under` and truncates at `sqrt(n)/r_over`.
pub fn conditional_laws(law: &EntryLaw, n: usize, r_under: f64, r_over: f64) -> Result<ConditionalLaws> {
    let lo = small_threshold(n, r_under);
    let hi = truncation_threshold(n, r_over);
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "need n^(1/4) R_under < sqrt(n)/R_over, got {lo} >= {hi}"
        )));
    }
    let small = ConditionalLaw::small(law, lo)?;
    let large = ConditionalLaw::annulus(law, lo, hi)?;
    let p_n = large.mass();
    Ok(ConditionalLaws { small, large, p_n })
}

/// Markov bound `beta4 / (n r_under^4)` on `P(|X| > n^{1/4} r_under)`.
pub fn markov_tail_bound(law: &EntryLaw, n: usize, r_under: f64) -> f64 {
    law.moment(4) / (n as f64 * r_under.powi(4))
}
