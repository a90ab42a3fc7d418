use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{CellStreams, EntryLaw};
use crate::matrix::SymmetricMatrix;
use crate::{Error, Result};

/// A raw (unscaled) symmetric matrix `X` together with the law and seed that
/// produced it. `W = n^{-1/2} X` is available through [`Self::scaled`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrixSample {
    pub law: EntryLaw,
    pub seed: u64,
    pub matrix: SymmetricMatrix,
}

impl SymmetricMatrixSample {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn scaled(&self) -> SymmetricMatrix {
        self.matrix.scaled(1.0 / (self.n() as f64).sqrt())
    }
}

/// Samples an `n x n` Wigner matrix whose upper-triangle entries are i.i.d.
/// draws from `law`, one substream per cell.
pub fn sample_wigner(law: &EntryLaw, n: usize, seed: u64) -> Result<SymmetricMatrixSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be >= 1".into()));
    }
    let sampler = law.sampler()?;
    let streams = CellStreams::new(seed);
    let matrix = SymmetricMatrix::from_upper(n, |j, k| sampler.sample(&mut streams.cell(j, k)));
    Ok(SymmetricMatrixSample {
        law: law.clone(),
        seed,
        matrix,
    })
}
