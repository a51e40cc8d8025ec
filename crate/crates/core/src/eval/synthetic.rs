//! Synthetic labeled feature corpus drawn from published per-class
//! 95% intervals of each feature's mean and standard deviation.
//!
//! Features are sampled independently. Each is a normal variable clamped
//! to its lower bound, `max(X, a)`. Clamping alone would pull the mean up
//! for heavily skewed features, so the underlying normal is solved for
//! such that the clamped variable has the target mean and SD exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::dataset::{DatasetRow, DatasetTable, Label};
use crate::features::{FeatureVector, INTEGER_FEATURES, NUM_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticFeature {
    pub name: &'static str,
    /// Interval for the mean, benign then malicious.
    pub mean_ci: [(f64, f64); 2],
    /// Interval for the standard deviation, benign then malicious.
    pub sd_ci: [(f64, f64); 2],
    pub lower: f64,
    pub upper: f64,
}

impl SyntheticFeature {
    pub fn target_mean(&self, label: Label) -> f64 {
        let (lo, hi) = self.mean_ci[class(label)];
        (lo + hi) / 2.0
    }

    pub fn target_sd(&self, label: Label) -> f64 {
        let (lo, hi) = self.sd_ci[class(label)];
        (lo + hi) / 2.0
    }
}

fn class(label: Label) -> usize {
    match label {
        Label::Benign => 0,
        Label::Malicious => 1,
    }
}

const fn feature(
    name: &'static str,
    benign: (f64, f64, f64, f64),
    malicious: (f64, f64, f64, f64),
    lower: f64,
    upper: f64,
) -> SyntheticFeature {
    SyntheticFeature {
        name,
        mean_ci: [(benign.0, benign.1), (malicious.0, malicious.1)],
        sd_ci: [(benign.2, benign.3), (malicious.2, malicious.3)],
        lower,
        upper,
    }
}

const INF: f64 = f64::INFINITY;

/// Per feature, in feature-vector order: (mean lo, mean hi, sd lo, sd hi)
/// for benign and malicious, then the support bounds.
pub const SYNTHETIC_PARAMETERS: [SyntheticFeature; NUM_FEATURES] = [
    feature("avg_children", (1.8601, 1.9044, 0.9561, 0.9874), (1.6359, 1.6469, 0.2881, 0.2959), 0.0, INF),
    feature("median_children", (0.1506, 0.1942, 0.9462, 0.9772), (0.9405, 0.9612, 0.5416, 0.5563), 0.0, INF),
    feature("var_children", (114.7908, 122.0534, 156.8088, 161.9459), (4.8081, 5.34606, 14.0821, 14.4626), 0.0, INF),
    feature("num_leaves", (152.1234, 157.9772, 126.3856, 130.5260), (12.2298, 12.7902, 14.6701, 15.0664), 0.0, INF),
    feature("num_edges", (441.5762, 471.6670, 649.6877, 670.9714), (43.8435, 45.6364, 46.9322, 48.2001), 0.0, INF),
    feature("num_nodes", (201.8999, 209.8423, 171.4772, 177.0948), (25.4634, 26.2143, 19.6561, 20.1871), 0.0, INF),
    feature("depth", (4.2561, 4.2831, 0.5867, 0.6059), (3.9594, 3.9692, 0.2579, 0.2648), 1.0, INF),
    feature("avg_degree", (3.1385, 3.2299, 1.9738, 2.0385), (2.8545, 2.8762, 0.5662, 0.5815), 0.0, INF),
    feature("degree_assortativity", (-0.4589, -0.4541, 0.1097, 0.1133), (-0.3071, -0.3033, 0.1005, 0.1032), -1.0, 1.0),
    feature("avg_shortest_path", (0.8079, 0.8279, 0.4358, 0.4500), (0.5430, 0.5498, 0.1759, 0.1806), 0.0, INF),
    feature("avg_clustering_coefficient", (0.0372, 0.0392, 0.0427, 0.0441), (0.0501, 0.0512, 0.0274, 0.0282), 0.0, 1.0),
    feature("density", (0.0205, 0.0213, 0.0230, 0.0238), (0.0764, 0.0772, 0.02047, 0.0210), 0.0, 1.0),
];

/// Location and scale of the normal whose lower-clamped version has the
/// given mean and SD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ClampedNormal {
    pub(crate) location: f64,
    pub(crate) scale: f64,
}

impl ClampedNormal {
    /// With `t = (location - lower) / scale` and `Z` standard normal,
    /// `E[max(Z + t, 0)] = t Phi(t) + phi(t)` and
    /// `E[max(Z + t, 0)^2] = (t^2 + 1) Phi(t) + t phi(t)`.
    /// The coefficient of variation is monotone in `t`, so `t` is found by
    /// bisection and the scale follows from the mean.
    pub(crate) fn solve(mean: f64, sd: f64, lower: f64) -> ClampedNormal {
        let z = Normal::standard();
        let g = |t: f64| t * z.cdf(t) + z.pdf(t);
        let h = |t: f64| (t * t + 1.0) * z.cdf(t) + t * z.pdf(t);
        let cv = |t: f64| (h(t) - g(t).powi(2)).max(0.0).sqrt() / g(t);
        let excess = mean - lower;
        assert!(excess > 0.0 && sd > 0.0, "mean must exceed the lower bound");
        let target = sd / excess;
        let (mut lo, mut hi) = (-8.0f64, 1000.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cv(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let scale = excess / g(t);
        ClampedNormal {
            location: lower + t * scale,
            scale,
        }
    }
}

/// `n_benign` benign rows followed by `n_malicious` malicious rows.
pub fn generate_synthetic_corpus(n_benign: usize, n_malicious: usize, seed: u64) -> DatasetTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_benign + n_malicious);
    for (label, n) in [(Label::Benign, n_benign), (Label::Malicious, n_malicious)] {
        let dists: Vec<ClampedNormal> = SYNTHETIC_PARAMETERS
            .iter()
            .map(|p| ClampedNormal::solve(p.target_mean(label), p.target_sd(label), p.lower))
            .collect();
        for i in 0..n {
            let mut values = [0.0; NUM_FEATURES];
            for (j, v) in values.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                let p = &SYNTHETIC_PARAMETERS[j];
                let x = (dists[j].location + dists[j].scale * z).max(p.lower).min(p.upper);
                *v = if INTEGER_FEATURES.contains(&j) { x.round() } else { x };
            }
            rows.push(DatasetRow {
                file_id: format!("synthetic-{label}-{i:05}"),
                label,
                features: FeatureVector::from_array(values).expect("clamped values are valid"),
            });
        }
    }
    DatasetTable::new(rows)
}
