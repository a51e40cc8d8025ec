//! Labeled feature tables and their CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, FEATURE_NAMES, NUM_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Benign, Label::Malicious];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::Malicious => "malicious",
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Benign => Label::Malicious,
            Label::Malicious => Label::Benign,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "benign" => Ok(Label::Benign),
            "malicious" => Ok(Label::Malicious),
            other => Err(format!("unknown label `{other}` (expected benign or malicious)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub file_id: String,
    pub label: Label,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetTable {
    pub rows: Vec<DatasetRow>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {line}: {message}")]
    InvalidRow { line: u64, message: String },
}

/// Dataset CSV header.
pub fn csv_header() -> Vec<&'static str> {
    let mut header = vec!["file", "label"];
    header.extend(FEATURE_NAMES);
    header
}

/// Formats one feature value: integers without a fraction, reals in the
/// shortest form that round-trips.
pub(crate) fn format_feature(index: usize, value: f64) -> String {
    if crate::features::INTEGER_FEATURES.contains(&index) {
        format!("{}", value as u64)
    } else {
        format!("{value}")
    }
}

/// CSV record for a single feature vector; `label` may be empty.
pub fn csv_record(file_id: &str, label: &str, features: &FeatureVector) -> Vec<String> {
    let mut record = vec![file_id.to_string(), label.to_string()];
    record.extend(
        features
            .to_array()
            .iter()
            .enumerate()
            .map(|(i, &v)| format_feature(i, v)),
    );
    record
}

impl DatasetTable {
    pub fn new(rows: Vec<DatasetRow>) -> Self {
        DatasetTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    /// Rows at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> DatasetTable {
        DatasetTable {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn column(&self, feature: usize, label: Label) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.label == label)
            .map(|r| r.features.to_array()[feature])
            .collect()
    }

    pub fn matrix(&self) -> Vec<[f64; NUM_FEATURES]> {
        self.rows.iter().map(|r| r.features.to_array()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn extend(&mut self, other: DatasetTable) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(csv_header())?;
        for row in &self.rows {
            writer.write_record(csv_record(&row.file_id, row.label.as_str(), &row.features))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<DatasetTable, DatasetError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = reader.headers()?.clone();
        let expected = csv_header();
        let position = |name: &str| header.iter().position(|h| h.trim() == name);
        let mut columns = Vec::with_capacity(expected.len());
        for name in &expected {
            match position(name) {
                Some(i) => columns.push(i),
                None => return Err(DatasetError::Schema(format!("missing column `{name}`"))),
            }
        }

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize| record.get(columns[i]).unwrap_or("").trim();
            let label = field(1)
                .parse::<Label>()
                .map_err(|message| DatasetError::InvalidRow { line, message })?;
            let mut values = [0.0; NUM_FEATURES];
            for (k, value) in values.iter_mut().enumerate() {
                let text = field(k + 2);
                *value = text.parse::<f64>().map_err(|_| DatasetError::InvalidRow {
                    line,
                    message: format!("`{text}` is not a number in column {}", FEATURE_NAMES[k]),
                })?;
            }
            let features = FeatureVector::from_array(values).ok_or_else(|| DatasetError::InvalidRow {
                line,
                message: "non-finite value or non-integral count".into(),
            })?;
            rows.push(DatasetRow {
                file_id: field(0).to_string(),
                label,
                features,
            });
        }
        Ok(DatasetTable { rows })
    }
}
