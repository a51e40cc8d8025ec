//! L2-regularized logistic regression on standardized features, trained by
//! full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::{require_per_class, Classifier, Sample, TrainError};
use crate::dataset::{DatasetTable, Label};
use crate::features::NUM_FEATURES;

pub const STEP: f64 = 0.1;
const MIN_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Logistic {
    pub weights: [f64; NUM_FEATURES],
    pub bias: f64,
    pub means: [f64; NUM_FEATURES],
    pub scales: [f64; NUM_FEATURES],
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Objective and gradient at `(w, b)` over already standardized rows,
/// with `y` in {0, 1}. The objective is the mean log-loss plus
/// `l2 / 2 * |w|^2`; the bias is not penalized.
pub fn loss_and_gradient(
    z: &[Sample],
    y: &[f64],
    w: &Sample,
    b: f64,
    l2: f64,
) -> (f64, Sample, f64) {
    let n = z.len() as f64;
    let mut loss = 0.0;
    let mut gw = [0.0; NUM_FEATURES];
    let mut gb = 0.0;
    for (row, &t) in z.iter().zip(y) {
        let s = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        // -[t ln p + (1-t) ln(1-p)] = softplus(s) - t s
        loss += softplus(s) - t * s;
        let r = sigmoid(s) - t;
        for (g, a) in gw.iter_mut().zip(row) {
            *g += r * a;
        }
        gb += r;
    }
    loss /= n;
    gb /= n;
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wj;
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, gw, gb)
}

impl Logistic {
    pub fn train(data: &DatasetTable, l2: f64, epochs: usize) -> Result<Self, TrainError> {
        require_per_class(data, 1)?;
        let x = data.matrix();
        let n = x.len() as f64;
        let mut means = [0.0; NUM_FEATURES];
        for row in &x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scales = [0.0; NUM_FEATURES];
        for row in &x {
            for j in 0..NUM_FEATURES {
                scales[j] += (row[j] - means[j]).powi(2) / n;
            }
        }
        let scales = scales.map(|v| v.sqrt().max(MIN_SCALE));

        let z: Vec<Sample> = x.iter().map(|row| standardize(row, &means, &scales)).collect();
        let y: Vec<f64> = data
            .labels()
            .iter()
            .map(|&l| if l == Label::Malicious { 1.0 } else { 0.0 })
            .collect();

        let mut weights = [0.0; NUM_FEATURES];
        let mut bias = 0.0;
        for _ in 0..epochs {
            let (_, gw, gb) = loss_and_gradient(&z, &y, &weights, bias, l2);
            for (w, g) in weights.iter_mut().zip(gw) {
                *w -= STEP * g;
            }
            bias -= STEP * gb;
        }
        Ok(Logistic {
            weights,
            bias,
            means,
            scales,
        })
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let finite = self
            .weights
            .iter()
            .chain(&self.means)
            .chain(std::iter::once(&self.bias))
            .all(|v| v.is_finite());
        if !finite {
            return Err("non-finite logistic parameter".into());
        }
        if self.scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err("logistic scales must be positive".into());
        }
        Ok(())
    }
}

fn standardize(x: &Sample, means: &Sample, scales: &Sample) -> Sample {
    std::array::from_fn(|j| (x[j] - means[j]) / scales[j])
}

impl Classifier for Logistic {
    fn malicious_score(&self, x: &Sample) -> f64 {
        let z = standardize(x, &self.means, &self.scales);
        sigmoid(self.bias + z.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>())
    }
}
