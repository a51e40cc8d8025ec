//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::{class_index, require_per_class, Classifier, Sample, TrainError};
use crate::dataset::DatasetTable;
use crate::features::NUM_FEATURES;

/// Relative variance floor, scaled by the largest overall feature variance.
const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianNb {
    /// Class priors, benign then malicious.
    pub priors: [f64; 2],
    pub means: [[f64; NUM_FEATURES]; 2],
    pub variances: [[f64; NUM_FEATURES]; 2],
    pub var_floor: f64,
}

fn population_moments<'a>(rows: impl Iterator<Item = &'a Sample> + Clone) -> ([f64; NUM_FEATURES], [f64; NUM_FEATURES]) {
    let n = rows.clone().count() as f64;
    let mut mean = [0.0; NUM_FEATURES];
    for x in rows.clone() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; NUM_FEATURES];
    for x in rows {
        for j in 0..NUM_FEATURES {
            var[j] += (x[j] - mean[j]).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    (mean, var)
}

impl GaussianNb {
    pub fn train(data: &DatasetTable) -> Result<Self, TrainError> {
        require_per_class(data, 2)?;
        let x = data.matrix();
        let labels = data.labels();

        let (_, overall_var) = population_moments(x.iter());
        let max_var = overall_var.iter().copied().fold(0.0, f64::max);
        let var_floor = if max_var > 0.0 {
            VAR_SMOOTHING * max_var
        } else {
            VAR_SMOOTHING
        };

        let mut priors = [0.0; 2];
        let mut means = [[0.0; NUM_FEATURES]; 2];
        let mut variances = [[0.0; NUM_FEATURES]; 2];
        for label in crate::dataset::Label::ALL {
            let c = class_index(label);
            let rows = x.iter().zip(&labels).filter(move |(_, &l)| l == label).map(|(r, _)| r);
            priors[c] = rows.clone().count() as f64 / x.len() as f64;
            let (m, v) = population_moments(rows);
            means[c] = m;
            variances[c] = v.map(|v| v.max(var_floor));
        }
        Ok(GaussianNb {
            priors,
            means,
            variances,
            var_floor,
        })
    }

    /// Log of prior times the class-conditional density.
    pub fn joint_log_likelihood(&self, x: &Sample, class: usize) -> f64 {
        let mut ll = self.priors[class].ln();
        for j in 0..NUM_FEATURES {
            let var = self.variances[class][j];
            ll -= 0.5 * (2.0 * std::f64::consts::PI * var).ln();
            ll -= (x[j] - self.means[class][j]).powi(2) / (2.0 * var);
        }
        ll
    }

    /// Normalized posterior `[benign, malicious]`.
    pub fn posterior(&self, x: &Sample) -> [f64; 2] {
        let lb = self.joint_log_likelihood(x, 0);
        let lm = self.joint_log_likelihood(x, 1);
        let mal = 1.0 / (1.0 + (lb - lm).exp());
        [1.0 - mal, mal]
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let finite = self.priors.iter().chain(self.means.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err("non-finite naive Bayes parameter".into());
        }
        if self.variances.iter().flatten().any(|&v| !(v >= self.var_floor && v.is_finite())) || self.var_floor <= 0.0 {
            return Err("naive Bayes variance below floor".into());
        }
        Ok(())
    }
}

impl Classifier for GaussianNb {
    fn malicious_score(&self, x: &Sample) -> f64 {
        self.posterior(x)[1]
    }
}
