use serde::{Deserialize, Serialize};

use crate::ensembles::{small_threshold, truncation_threshold, EntryLaw};
use crate::matrix::SymmetricMatrix;

/// Parameters of the configuration classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigParams {
    pub r_under: f64,
    /// cluster size; admissible configurations have `r(L) <= r - 1`
    pub r: usize,
    /// deviant multiplier `K`
    pub k: usize,
    /// probability of a large entry, used in the deviant threshold
    pub p_n: f64,
}

impl ConfigParams {
    /// `r = ceil(log^3 n)`, `R_under = ceil(log n)`, `K = ceil(log^3 n)`, with
    /// `p_n = P(n^{1/4} R_under < |X| <= sqrt(n)/R_over)` from the law.
    pub fn defaults(law: &EntryLaw, n: usize, r_over: f64) -> Self {
        let l = (n as f64).ln();
        let r_under = l.ceil();
        let cube = l.powi(3).ceil() as usize;
        let lo = small_threshold(n, r_under);
        let hi = truncation_threshold(n, r_over);
        Self {
            r_under,
            r: cube.max(1),
            k: cube.max(1),
            p_n: law.annulus_probability(lo, hi),
        }
    }
}

/// Symmetric 0/1 matrix `L` with `L_jk = 1` for small entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationMatrix {
    n: usize,
    small: Vec<bool>,
    pub params: ConfigParams,
}

impl ConfigurationMatrix {
    pub fn all_ones(n: usize, params: ConfigParams) -> Self {
        Self {
            n,
            small: vec![true; n * n],
            params,
        }
    }

    /// Configuration with zeros exactly at the listed positions (and their mirrors).
    pub fn from_zeros(n: usize, zeros: &[(usize, usize)], params: ConfigParams) -> Self {
        let mut l = Self::all_ones(n, params);
        for &(j, k) in zeros {
            l.set(j, k, false);
        }
        l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_small(&self, j: usize, k: usize) -> bool {
        self.small[j * self.n + k]
    }

    pub fn get(&self, j: usize, k: usize) -> u8 {
        self.is_small(j, k) as u8
    }

    pub fn set(&mut self, j: usize, k: usize, small: bool) {
        self.small[j * self.n + k] = small;
        self.small[k * self.n + j] = small;
    }

    /// Number of zeros in the full array.
    pub fn zero_count(&self) -> usize {
        self.small.iter().filter(|s| !**s).count()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|j| (j..self.n).all(|k| self.is_small(j, k) == self.is_small(k, j)))
    }
}

/// `L_jk = 1[|X_jk| <= n^{1/4} R_under]` with `n` the matrix size.
pub fn build_configuration(x: &SymmetricMatrix, params: ConfigParams) -> ConfigurationMatrix {
    let n = x.n();
    let level = small_threshold(n, params.r_under);
    let mut l = ConfigurationMatrix::all_ones(n, params);
    for j in 0..n {
        for k in j..n {
            if x.get(j, k).abs() > level {
                l.set(j, k, false);
            }
        }
    }
    l
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub deviant_set: Vec<usize>,
    pub typical_set: Vec<usize>,
    /// connected components of the zero-entry graph, each sorted, ordered by
    /// smallest member
    pub components: Vec<Vec<usize>>,
    /// largest component size, 0 when there are no deviant indices
    pub r_of_l: usize,
    /// `K max(1, n^2 p_n)`
    pub deviant_threshold: f64,
    pub deviant_inadmissible: bool,
    pub r_admissible: bool,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

pub fn classify(l: &ConfigurationMatrix) -> AdmissibilityVerdict {
    let n = l.n();
    let mut uf = UnionFind::new(n);
    let mut deviant = vec![false; n];
    for j in 0..n {
        for k in j..n {
            if !l.is_small(j, k) {
                deviant[j] = true;
                deviant[k] = true;
                uf.union(j, k);
            }
        }
    }
    let deviant_set: Vec<usize> = (0..n).filter(|&j| deviant[j]).collect();
    let typical_set: Vec<usize> = (0..n).filter(|&j| !deviant[j]).collect();

    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &j in &deviant_set {
        let root = uf.find(j);
        by_root.entry(root).or_default().push(j);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
    components.sort_by_key(|c| c[0]);
    let r_of_l = components.iter().map(Vec::len).max().unwrap_or(0);

    let p = &l.params;
    let nf = n as f64;
    let deviant_threshold = p.k as f64 * (nf * nf * p.p_n).max(1.0);
    let deviant_inadmissible = deviant_set.len() as f64 >= deviant_threshold;
    let r_admissible = !deviant_inadmissible && r_of_l + 1 <= p.r;
    AdmissibilityVerdict {
        deviant_set,
        typical_set,
        components,
        r_of_l,
        deviant_threshold,
        deviant_inadmissible,
        r_admissible,
    }
}

/// Closed-form upper bounds on the probabilities of the two inadmissibility
/// events, in natural-log form and exponentiated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InadmissibilityBounds {
    /// `3r + ln n - ln r - 4(r-1) ln R_under`
    pub ln_p_rconn: f64,
    /// `-c K max(1, n^2 p_n)`
    pub ln_p_deviant: f64,
    pub p_rconn: f64,
    pub p_deviant: f64,
}

pub fn inadmissibility_probability_bounds(
    n: usize,
    r: usize,
    r_under: f64,
    k: usize,
    p_n: f64,
    chernoff_c: f64,
) -> InadmissibilityBounds {
    let nf = n as f64;
    let rf = r as f64;
    let ln_p_rconn = 3.0 * rf + nf.ln() - rf.ln() - 4.0 * (rf - 1.0) * r_under.ln();
    let ln_p_deviant = -chernoff_c * k as f64 * (nf * nf * p_n).max(1.0);
    InadmissibilityBounds {
        ln_p_rconn,
        ln_p_deviant,
        p_rconn: ln_p_rconn.exp(),
        p_deviant: ln_p_deviant.exp(),
    }
}
