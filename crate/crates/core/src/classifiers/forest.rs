//! Random forest of bootstrapped CART trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTree, FeatureSampler};
use super::{require_per_class, Classifier, Sample, TrainError};
use crate::dataset::{DatasetTable, Label};

/// ceil(sqrt(12)).
pub const FEATURES_PER_SPLIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomForest {
    pub seed: u64,
    /// Generator stream of each tree; tree `i` draws from `(seed, streams[i])`.
    pub streams: Vec<u64>,
    pub trees: Vec<DecisionTree>,
}

/// Per-tree generator. Streams are independent, so trees can be grown in any order.
pub fn tree_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl RandomForest {
    pub fn train(
        data: &DatasetTable,
        n_trees: usize,
        max_depth: Option<usize>,
        seed: u64,
    ) -> Result<Self, TrainError> {
        require_per_class(data, 2)?;
        if n_trees == 0 {
            return Err(TrainError::InsufficientData("n_trees must be at least 1".into()));
        }
        let x = data.matrix();
        let y = data.labels();
        let n = x.len();
        let streams: Vec<u64> = (0..n_trees as u64).collect();
        let trees = streams
            .par_iter()
            .map(|&stream| {
                let mut rng = tree_rng(seed, stream);
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let sampler = FeatureSampler {
                    per_split: FEATURES_PER_SPLIT,
                    rng: &mut rng,
                };
                grow(&x, &y, rows, max_depth, Some(sampler))
            })
            .collect();
        Ok(RandomForest { seed, streams, trees })
    }

    /// Number of trees voting malicious.
    pub fn malicious_votes(&self, x: &Sample) -> usize {
        self.trees.iter().filter(|t| t.vote(x) == Label::Malicious).count()
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.trees.is_empty() {
            return Err("random forest has no trees".into());
        }
        if self.streams.len() != self.trees.len() {
            return Err("random forest stream count does not match tree count".into());
        }
        self.trees.iter().try_for_each(DecisionTree::validate)
    }
}

impl Classifier for RandomForest {
    /// Fraction of trees voting malicious; an even split is benign.
    fn malicious_score(&self, x: &Sample) -> f64 {
        self.malicious_votes(x) as f64 / self.trees.len() as f64
    }
}
