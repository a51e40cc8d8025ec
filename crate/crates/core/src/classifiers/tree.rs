//! Binary CART classification tree with Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct values.
//! Split quality is compared exactly in integer arithmetic, so ties are
//! genuine ties and resolve to the lowest feature index, then the lowest
//! threshold. A node splits whenever some candidate separates its rows,
//! even with zero impurity decrease; this is what lets the tree fit XOR.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, Sample, TrainError};
use crate::dataset::{DatasetTable, Label};
use crate::features::NUM_FEATURES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeNode {
    Leaf {
        benign: u64,
        malicious: u64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTree {
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn train(data: &DatasetTable, max_depth: Option<usize>) -> Result<Self, TrainError> {
        if data.len() < 2 {
            return Err(TrainError::InsufficientData(format!(
                "need at least 2 rows, have {}",
                data.len()
            )));
        }
        let x = data.matrix();
        let y = data.labels();
        let rows: Vec<usize> = (0..x.len()).collect();
        Ok(grow(&x, &y, rows, max_depth, None))
    }

    fn leaf(&self, x: &Sample) -> (u64, u64) {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { benign, malicious } => return (*benign, *malicious),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Majority label of the leaf reached by `x`; ties are benign.
    pub fn vote(&self, x: &Sample) -> Label {
        let (b, m) = self.leaf(x);
        if m > b {
            Label::Malicious
        } else {
            Label::Benign
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            best = best.max(d);
            if let TreeNode::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("empty tree".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } = *node
            {
                // Children always come after their parent, which rules out cycles.
                let in_range = |c: usize| c > i && c < self.nodes.len();
                if feature >= NUM_FEATURES || !threshold.is_finite() || !in_range(left) || !in_range(right) {
                    return Err(format!("invalid split node {i}"));
                }
            }
        }
        Ok(())
    }
}

impl Classifier for DecisionTree {
    fn malicious_score(&self, x: &Sample) -> f64 {
        let (b, m) = self.leaf(x);
        if b + m == 0 {
            0.0
        } else {
            m as f64 / (b + m) as f64
        }
    }
}

/// Random feature subsampling for forest trees.
pub(crate) struct FeatureSampler<'r> {
    pub(crate) per_split: usize,
    pub(crate) rng: &'r mut ChaCha8Rng,
}

impl FeatureSampler<'_> {
    /// `per_split` distinct features, ascending (partial Fisher-Yates).
    fn draw(&mut self) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..NUM_FEATURES).collect();
        let k = self.per_split.min(NUM_FEATURES);
        for i in 0..k {
            let j = self.rng.random_range(i..NUM_FEATURES);
            pool.swap(i, j);
        }
        let mut chosen = pool[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }
}

#[derive(Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    /// Split score as the fraction `num / den`; larger is better.
    num: u128,
    den: u128,
}

impl Split {
    fn beats(&self, other: &Split) -> bool {
        self.num * other.den > other.num * self.den
    }
}

fn counts(y: &[Label], rows: &[usize]) -> (u64, u64) {
    let m = rows.iter().filter(|&&r| y[r] == Label::Malicious).count() as u64;
    (rows.len() as u64 - m, m)
}

/// Grows a tree over `rows` (duplicates allowed, as in a bootstrap sample).
pub(crate) fn grow(
    x: &[Sample],
    y: &[Label],
    rows: Vec<usize>,
    max_depth: Option<usize>,
    mut sampler: Option<FeatureSampler<'_>>,
) -> DecisionTree {
    let mut nodes = vec![TreeNode::Leaf { benign: 0, malicious: 0 }];
    let mut work = vec![(0usize, rows, 0usize)];
    while let Some((slot, rows, depth)) = work.pop() {
        let (benign, malicious) = counts(y, &rows);
        let pure = benign == 0 || malicious == 0;
        let depth_reached = max_depth.is_some_and(|d| depth >= d);
        let split = if pure || depth_reached || rows.len() < 2 {
            None
        } else {
            let candidates = match sampler.as_mut() {
                Some(s) => s.draw(),
                None => (0..NUM_FEATURES).collect(),
            };
            best_split(x, y, &rows, &candidates).or_else(|| {
                // None of the sampled features varies here; try the rest.
                if candidates.len() < NUM_FEATURES {
                    best_split(x, y, &rows, &(0..NUM_FEATURES).collect::<Vec<_>>())
                } else {
                    None
                }
            })
        };

        match split {
            None => nodes[slot] = TreeNode::Leaf { benign, malicious },
            Some(split) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| x[r][split.feature] <= split.threshold);
                let left = nodes.len();
                let right = left + 1;
                nodes.push(TreeNode::Leaf { benign: 0, malicious: 0 });
                nodes.push(TreeNode::Leaf { benign: 0, malicious: 0 });
                nodes[slot] = TreeNode::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                work.push((right, right_rows, depth + 1));
                work.push((left, left_rows, depth + 1));
            }
        }
    }
    DecisionTree { nodes }
}

/// Best Gini split among `features`, maximizing
/// `sum over children of (b^2 + m^2) / n_child`, which is equivalent to
/// maximizing the impurity decrease.
fn best_split(x: &[Sample], y: &[Label], rows: &[usize], features: &[usize]) -> Option<Split> {
    let (total_b, total_m) = counts(y, rows);
    let total = u128::from(total_b + total_m);
    let mut best: Option<Split> = None;
    let mut order = rows.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        let (mut lb, mut lm) = (0u128, 0u128);
        for w in 0..order.len() - 1 {
            if y[order[w]] == Label::Malicious {
                lm += 1;
            } else {
                lb += 1;
            }
            let (lo, hi) = (x[order[w]][f], x[order[w + 1]][f]);
            if lo >= hi {
                continue;
            }
            let nl = lb + lm;
            let nr = total - nl;
            let (rb, rm) = (u128::from(total_b) - lb, u128::from(total_m) - lm);
            let candidate = Split {
                feature: f,
                threshold: midpoint(lo, hi),
                num: (lb * lb + lm * lm) * nr + (rb * rb + rm * rm) * nl,
                den: nl * nr,
            };
            if best.as_ref().is_none_or(|b| candidate.beats(b)) {
                best = Some(candidate);
            }
        }
    }
    best
}

/// Midpoint that always separates `lo` from `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || !mid.is_finite() {
        lo
    } else {
        mid
    }
}
