//! Document-level train/validation/test splitting.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Used when no seed is given on the command line.
pub const DEFAULT_SPLIT_SEED: u64 = 42;

/// Ratios and seed for a three-way split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// train : validation : test proportions.
    pub ratios: [u64; 3],
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(ratios: [u64; 3], seed: u64) -> Result<Self> {
        if ratios.iter().sum::<u64>() == 0 {
            return Err(Error::Invalid("split ratios must sum to > 0".into()));
        }
        Ok(Self { ratios, seed })
    }

    /// Parses a `train:val:test` string such as "8:1:1".
    pub fn parse_ratios(s: &str) -> Result<[u64; 3]> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Invalid(format!(
                "ratio {s:?} must have the form train:val:test"
            )));
        }
        let mut ratios = [0u64; 3];
        for (slot, part) in ratios.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Invalid(format!("ratio component {part:?} is not a number")))?;
        }
        if ratios.iter().sum::<u64>() == 0 {
            return Err(Error::Invalid("split ratios must sum to > 0".into()));
        }
        Ok(ratios)
    }

    /// Partition sizes for `n` documents: floor for train and validation,
    /// remainder to test.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let total: u64 = self.ratios.iter().sum();
        let train = (n as u64 * self.ratios[0] / total) as usize;
        let val = (n as u64 * self.ratios[1] / total) as usize;
        (train, val, n - train - val)
    }
}

/// Shuffles documents with a Fisher-Yates pass over a splitmix64 stream
/// seeded with `spec.seed`, then cuts the shuffled order into train,
/// validation, and test partitions of the sizes given by
/// [`SplitSpec::sizes`]. Document-level and deterministic per seed.
pub fn split_corpus(corpus: &Corpus, spec: &SplitSpec) -> (Corpus, Corpus, Corpus) {
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = SplitMix64::new(spec.seed);
    rng.shuffle(&mut order);

    let (n_train, n_val, _) = spec.sizes(corpus.len());
    let pick = |indices: &[usize]| {
        let docs = indices
            .iter()
            .map(|&i| corpus.docs()[i].clone())
            .collect::<Vec<_>>();
        Corpus::new(docs).expect("ids unique in the parent corpus")
    };
    (
        pick(&order[..n_train]),
        pick(&order[n_train..n_train + n_val]),
        pick(&order[n_train + n_val..]),
    )
}
