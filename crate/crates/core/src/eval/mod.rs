//! Stratified k-fold cross-validation and detection metrics.
//!
//! Confusion matrices treat benign as the positive class: `tp` counts benign
//! rows predicted benign and `tn` malicious rows predicted malicious.

mod synthetic;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::classifiers::{Classifier, Learner, TrainError};
use crate::dataset::{DatasetTable, Label};
use crate::stats::Interval;

pub use synthetic::{generate_synthetic_corpus, SyntheticFeature, SYNTHETIC_PARAMETERS};

pub const DEFAULT_FOLDS: usize = 5;

/// How fold intervals are computed; recorded in every report.
pub const CI_METHOD: &str = "student-t 95% interval of per-fold values, clamped to [0, 1]";

/// Two-sided 95% Student-t critical values for 1 to 30 degrees of freedom.
pub const T_975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("length mismatch: {predictions} predictions for {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error(transparent)]
    Train(#[from] TrainError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles each class with a seeded generator and deals its rows
/// round-robin into `k` folds. The deal continues across classes, so fold
/// sizes differ by at most one row overall.
pub fn stratified_kfold(data: &DatasetTable, k: usize, seed: u64) -> Result<Vec<Fold>, EvalError> {
    if k < 2 {
        return Err(EvalError::InsufficientData(format!("k must be at least 2, got {k}")));
    }
    for label in Label::ALL {
        let have = data.count(label);
        if have < k {
            return Err(EvalError::InsufficientData(format!(
                "{label} has {have} rows, fewer than k = {k}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut next = 0;
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.rows[i].label == label).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            tests[next % k].push(i);
            next += 1;
        }
    }
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; data.len()];
            test.iter().for_each(|&i| in_test[i] = true);
            let train = (0..data.len()).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Benign predicted benign.
    pub tp: u64,
    /// Benign predicted malicious.
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Malicious predicted benign.
    pub fp: u64,
    /// Malicious predicted malicious.
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (truth, predicted) {
            (Label::Benign, Label::Benign) => self.tp += 1,
            (Label::Benign, Label::Malicious) => self.fn_ += 1,
            (Label::Malicious, Label::Benign) => self.fp += 1,
            (Label::Malicious, Label::Malicious) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.fp += other.fp;
        self.tn += other.tn;
    }
}

pub fn confusion(predictions: &[Label], truths: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if truths.is_empty() {
        return Err(EvalError::InsufficientData("no predictions".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        cm.record(p, t);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub accuracy: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub tnr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rates: Rates,
    pub benign: LabelMetrics,
    pub malicious: LabelMetrics,
}

impl Metrics {
    pub fn label(&self, label: Label) -> &LabelMetrics {
        match label {
            Label::Benign => &self.benign,
            Label::Malicious => &self.malicious,
        }
    }
}

/// `a / b`, with 0/0 defined as 0.
pub fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let ConfusionMatrix { tp, fn_, fp, tn } = *cm;
    let rates = Rates {
        accuracy: ratio(tp + tn, cm.total()),
        tpr: ratio(tp, tp + fn_),
        fpr: ratio(fp, fp + tn),
        fnr: ratio(fn_, tp + fn_),
        tnr: ratio(tn, fp + tn),
    };
    let benign_precision = ratio(tp, tp + fp);
    let malicious_precision = ratio(tn, tn + fn_);
    Metrics {
        rates,
        benign: LabelMetrics {
            precision: benign_precision,
            recall: rates.tpr,
            f1: harmonic(benign_precision, rates.tpr),
        },
        malicious: LabelMetrics {
            precision: malicious_precision,
            recall: rates.tnr,
            f1: harmonic(malicious_precision, rates.tnr),
        },
    }
}

/// 0.975 quantile of Student's t.
pub fn t_critical(df: usize) -> f64 {
    match df {
        1..=30 => T_975[df - 1],
        _ => StudentsT::new(0.0, 1.0, df as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975),
    }
}

/// `mean ± t(n-1) s / sqrt(n)` over per-fold values, clamped to `[0, 1]`.
pub fn ci_over_folds(values: &[f64]) -> Result<Interval, EvalError> {
    let n = values.len();
    if n < 2 {
        return Err(EvalError::InsufficientData(format!("need at least 2 values, have {n}")));
    }
    let mean = crate::stats::mean(values);
    let half = t_critical(n - 1) * crate::stats::sample_sd(values) / (n as f64).sqrt();
    Ok(Interval {
        lo: (mean - half).clamp(0.0, 1.0),
        hi: (mean + half).clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelIntervals {
    pub precision: Interval,
    pub recall: Interval,
    pub f1: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intervals {
    pub benign: LabelIntervals,
    pub malicious: LabelIntervals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub k: usize,
    pub seed: u64,
    pub ci_method: String,
    pub folds: Vec<FoldReport>,
    /// Confusion matrix summed over folds.
    pub pooled: ConfusionMatrix,
    /// Rates and per-label metrics of the pooled matrix.
    pub aggregate: Metrics,
    /// Per-label metrics averaged over folds; the centers of `ci`.
    pub fold_mean: Metrics,
    pub ci: Intervals,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Table with label rows and metric columns, followed by the pooled rates.
    pub fn to_text(&self, title: &str) -> String {
        let iv = |i: &Interval| format!("{:.4} - {:.4}", i.lo, i.hi);
        let mut out = String::new();
        let _ = writeln!(out, "{title} ({}-fold, seed {})", self.k, self.seed);
        let _ = writeln!(
            out,
            "{:<10} {:>17} {:>17} {:>17}",
            "Label", "Precision", "Recall", "F1"
        );
        for (name, ci) in [("Benign", &self.ci.benign), ("Malicious", &self.ci.malicious)] {
            let _ = writeln!(
                out,
                "{:<10} {:>17} {:>17} {:>17}",
                name,
                iv(&ci.precision),
                iv(&ci.recall),
                iv(&ci.f1)
            );
        }
        let r = &self.aggregate.rates;
        let _ = writeln!(
            out,
            "\n{:>8} {:>8} {:>8} {:>8} {:>8}",
            "Accuracy", "TPR", "FPR", "FNR", "TNR"
        );
        let _ = writeln!(
            out,
            "{:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            r.accuracy, r.tpr, r.fpr, r.fnr, r.tnr
        );
        let c = &self.pooled;
        let _ = writeln!(out, "\nconfusion (benign positive): tp={} fn={} fp={} tn={}", c.tp, c.fn_, c.fp, c.tn);
        let _ = writeln!(out, "ci: {}", self.ci_method);
        out
    }
}

fn label_intervals(per_fold: &[LabelMetrics]) -> Result<LabelIntervals, EvalError> {
    let col = |f: fn(&LabelMetrics) -> f64| per_fold.iter().map(f).collect::<Vec<_>>();
    Ok(LabelIntervals {
        precision: ci_over_folds(&col(|m| m.precision))?,
        recall: ci_over_folds(&col(|m| m.recall))?,
        f1: ci_over_folds(&col(|m| m.f1))?,
    })
}

fn mean_metrics(folds: &[FoldReport]) -> Metrics {
    let n = folds.len() as f64;
    let avg = |f: &dyn Fn(&Metrics) -> f64| folds.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    let label = |l: Label| LabelMetrics {
        precision: avg(&|m| m.label(l).precision),
        recall: avg(&|m| m.label(l).recall),
        f1: avg(&|m| m.label(l).f1),
    };
    Metrics {
        rates: Rates {
            accuracy: avg(&|m| m.rates.accuracy),
            tpr: avg(&|m| m.rates.tpr),
            fpr: avg(&|m| m.rates.fpr),
            fnr: avg(&|m| m.rates.fnr),
            tnr: avg(&|m| m.rates.tnr),
        },
        benign: label(Label::Benign),
        malicious: label(Label::Malicious),
    }
}

/// Seed used to train the model of fold `fold`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add(fold as u64)
}

/// Trains on each fold complement and tests on the fold. Folds run in
/// parallel; the result does not depend on scheduling.
pub fn evaluate<L: Learner>(data: &DatasetTable, learner: &L, k: usize, seed: u64) -> Result<EvalReport, EvalError> {
    let folds = stratified_kfold(data, k, seed)?;
    let x = data.matrix();
    let truths = data.labels();
    let reports = folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| {
            let model = learner.fit(&data.subset(&fold.train), fold_seed(seed, i))?;
            let predicted: Vec<Label> = fold.test.iter().map(|&r| model.predict(&x[r]).label).collect();
            let expected: Vec<Label> = fold.test.iter().map(|&r| truths[r]).collect();
            let cm = confusion(&predicted, &expected)?;
            Ok(FoldReport {
                fold: i,
                n_train: fold.train.len(),
                n_test: fold.test.len(),
                confusion: cm,
                metrics: metrics(&cm),
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut pooled = ConfusionMatrix::default();
    reports.iter().for_each(|r| pooled.merge(&r.confusion));
    let per_label = |l: Label| reports.iter().map(|r| *r.metrics.label(l)).collect::<Vec<_>>();
    let ci = Intervals {
        benign: label_intervals(&per_label(Label::Benign))?,
        malicious: label_intervals(&per_label(Label::Malicious))?,
    };
    Ok(EvalReport {
        model: learner.describe(),
        k,
        seed,
        ci_method: CI_METHOD.to_string(),
        aggregate: metrics(&pooled),
        fold_mean: mean_metrics(&reports),
        pooled,
        ci,
        folds: reports,
    })
}
