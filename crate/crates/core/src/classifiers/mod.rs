//! From-scratch binary classifiers over feature vectors.
//!
//! Every model scores the probability of the malicious class; the label is
//! malicious only when that score is strictly above one half, so exact ties
//! resolve to benign.

mod forest;
pub mod logistic;
mod naive_bayes;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetTable, Label};
use crate::features::{FeatureVector, FEATURE_NAMES, NUM_FEATURES};

pub use forest::RandomForest;
pub use logistic::Logistic;
pub use naive_bayes::GaussianNb;
pub use tree::DecisionTree;

/// Persisted model format version.
pub const MODEL_VERSION: u32 = 1;

pub type Sample = [f64; NUM_FEATURES];

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model version {found} (expected {MODEL_VERSION})")]
    Version { found: u32 },
    #[error("invalid model: {0}")]
    Invalid(String),
}

pub trait Classifier {
    /// Probability of the malicious class, in `[0, 1]`.
    fn malicious_score(&self, x: &Sample) -> f64;

    fn predict(&self, x: &Sample) -> Prediction {
        Prediction::from_score(self.malicious_score(x))
    }
}

/// A training procedure. The evaluation harness only relies on this trait.
pub trait Learner: Sync {
    type Model: Classifier + Send;

    fn fit(&self, data: &DatasetTable, seed: u64) -> Result<Self::Model, TrainError>;

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Self::with_threshold(score, 0.5)
    }

    pub fn with_threshold(score: f64, threshold: f64) -> Self {
        let label = if score > threshold {
            Label::Malicious
        } else {
            Label::Benign
        };
        Prediction { label, score }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GaussianNb,
    Cart,
    RandomForest,
    Logistic,
}

impl ModelKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "nb",
            ModelKind::Cart => "cart",
            ModelKind::RandomForest => "rf",
            ModelKind::Logistic => "logistic",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "Naive Bayes",
            ModelKind::Cart => "Decision Tree",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::Logistic => "Simple Logistic",
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nb" | "gaussian_nb" => Ok(ModelKind::GaussianNb),
            "cart" | "tree" => Ok(ModelKind::Cart),
            "rf" | "random_forest" => Ok(ModelKind::RandomForest),
            "logistic" => Ok(ModelKind::Logistic),
            other => Err(format!("unknown model `{other}` (expected nb, cart, rf or logistic)")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Model kind plus hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    GaussianNb,
    Cart { max_depth: Option<usize> },
    RandomForest { n_trees: usize, max_depth: Option<usize> },
    Logistic { l2: f64, epochs: usize },
}

impl ModelSpec {
    pub const DEFAULT_TREES: usize = 100;
    pub const DEFAULT_L2: f64 = 1e-4;
    pub const DEFAULT_EPOCHS: usize = 500;

    /// The kind with default hyperparameters.
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::GaussianNb => ModelSpec::GaussianNb,
            ModelKind::Cart => ModelSpec::Cart { max_depth: None },
            ModelKind::RandomForest => ModelSpec::RandomForest {
                n_trees: Self::DEFAULT_TREES,
                max_depth: None,
            },
            ModelKind::Logistic => ModelSpec::Logistic {
                l2: Self::DEFAULT_L2,
                epochs: Self::DEFAULT_EPOCHS,
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::GaussianNb => ModelKind::GaussianNb,
            ModelSpec::Cart { .. } => ModelKind::Cart,
            ModelSpec::RandomForest { .. } => ModelKind::RandomForest,
            ModelSpec::Logistic { .. } => ModelKind::Logistic,
        }
    }

    pub fn train(&self, data: &DatasetTable, seed: u64) -> Result<TrainedModel, TrainError> {
        let params = match *self {
            ModelSpec::GaussianNb => ModelParams::GaussianNb(GaussianNb::train(data)?),
            ModelSpec::Cart { max_depth } => ModelParams::Cart(DecisionTree::train(data, max_depth)?),
            ModelSpec::RandomForest { n_trees, max_depth } => {
                ModelParams::RandomForest(RandomForest::train(data, n_trees, max_depth, seed)?)
            }
            ModelSpec::Logistic { l2, epochs } => ModelParams::Logistic(Logistic::train(data, l2, epochs)?),
        };
        Ok(TrainedModel {
            seed,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            params,
        })
    }
}

impl Learner for ModelSpec {
    type Model = TrainedModel;

    fn fit(&self, data: &DatasetTable, seed: u64) -> Result<TrainedModel, TrainError> {
        self.train(data, seed)
    }

    fn describe(&self) -> String {
        match self {
            ModelSpec::GaussianNb => "gaussian_nb".into(),
            ModelSpec::Cart { max_depth } => format!("cart(max_depth={max_depth:?})"),
            ModelSpec::RandomForest { n_trees, max_depth } => {
                format!("random_forest(n_trees={n_trees}, max_depth={max_depth:?})")
            }
            ModelSpec::Logistic { l2, epochs } => format!("logistic(l2={l2}, epochs={epochs})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    GaussianNb(GaussianNb),
    Cart(DecisionTree),
    RandomForest(RandomForest),
    Logistic(Logistic),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::GaussianNb(_) => ModelKind::GaussianNb,
            ModelParams::Cart(_) => ModelKind::Cart,
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::Logistic(_) => ModelKind::Logistic,
        }
    }

    pub fn predict_features(&self, features: &FeatureVector) -> Prediction {
        self.predict(&features.to_array())
    }

    /// Pretty-printed JSON; floats keep full round-trip precision.
    pub fn save(&self) -> String {
        let parameters = match &self.params {
            ModelParams::GaussianNb(m) => serde_json::to_value(m),
            ModelParams::Cart(m) => serde_json::to_value(m),
            ModelParams::RandomForest(m) => serde_json::to_value(m),
            ModelParams::Logistic(m) => serde_json::to_value(m),
        }
        .expect("model parameters serialize");
        let file = ModelFile {
            version: MODEL_VERSION,
            kind: self.kind(),
            feature_names: self.feature_names.clone(),
            seed: self.seed,
            parameters,
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn load(text: &str) -> Result<TrainedModel, FormatError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_VERSION {
            return Err(FormatError::Version { found: file.version });
        }
        if file.feature_names.iter().map(String::as_str).ne(FEATURE_NAMES) {
            return Err(FormatError::Invalid("feature names do not match".into()));
        }
        let params = match file.kind {
            ModelKind::GaussianNb => ModelParams::GaussianNb(serde_json::from_value(file.parameters)?),
            ModelKind::Cart => ModelParams::Cart(serde_json::from_value(file.parameters)?),
            ModelKind::RandomForest => ModelParams::RandomForest(serde_json::from_value(file.parameters)?),
            ModelKind::Logistic => ModelParams::Logistic(serde_json::from_value(file.parameters)?),
        };
        let valid = match &params {
            ModelParams::GaussianNb(m) => m.validate(),
            ModelParams::Cart(m) => m.validate(),
            ModelParams::RandomForest(m) => m.validate(),
            ModelParams::Logistic(m) => m.validate(),
        };
        valid.map_err(FormatError::Invalid)?;
        Ok(TrainedModel {
            seed: file.seed,
            feature_names: file.feature_names,
            params,
        })
    }
}

impl Classifier for TrainedModel {
    fn malicious_score(&self, x: &Sample) -> f64 {
        match &self.params {
            ModelParams::GaussianNb(m) => m.malicious_score(x),
            ModelParams::Cart(m) => m.malicious_score(x),
            ModelParams::RandomForest(m) => m.malicious_score(x),
            ModelParams::Logistic(m) => m.malicious_score(x),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    kind: ModelKind,
    feature_names: Vec<String>,
    seed: u64,
    parameters: serde_json::Value,
}

/// Index used for per-class arrays: benign 0, malicious 1.
pub(crate) fn class_index(label: Label) -> usize {
    match label {
        Label::Benign => 0,
        Label::Malicious => 1,
    }
}

pub(crate) fn require_per_class(data: &DatasetTable, min: usize) -> Result<(), TrainError> {
    for label in Label::ALL {
        let have = data.count(label);
        if have < min {
            return Err(TrainError::InsufficientData(format!(
                "need at least {min} {label} rows, have {have}"
            )));
        }
    }
    Ok(())
}
