//! Entry laws, seeded Wigner sampling, conditioned laws and bounded
//! moment-matched replacements.

mod conditional;
mod law;
mod matching;
mod sample;
mod streams;

pub use conditional::{
    conditional_laws, markov_tail_bound, small_threshold, truncation_threshold, ConditionalLaw,
    ConditionalLaws, Region, REJECTION_CAP,
};
pub use law::{AtomTable, EntryLaw, LawSampler};
pub use matching::{match_bounded, MatchedBoundedLaw};
pub use sample::{sample_wigner, SymmetricMatrixSample};
pub use streams::{derive_seed, CellStreams};

/// First four moments `(m1, m2, m3, m4)` in closed form.
pub fn law_moments(law: &EntryLaw) -> [f64; 4] {
    [1, 2, 3, 4].map(|k| law.moment(k))
}
