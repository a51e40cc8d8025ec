//! Per-class feature summaries: quantiles, 95% intervals for the mean and
//! standard deviation, and box-plot five-number summaries.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::dataset::{DatasetTable, Label};
use crate::features::{FEATURE_NAMES, NUM_FEATURES};

/// Normal critical value used for the mean interval.
pub const Z_95: f64 = 1.96;

/// Standard normal 0.975 quantile at full precision.
const Z_975: f64 = 1.959_963_984_540_054;

/// Below this many degrees of freedom the Wilson-Hilferty cube-root
/// approximation is replaced by the exact chi-square quantile.
const WILSON_HILFERTY_MIN_DF: f64 = 30.0;

/// Features left out of box-plot exports because they are discrete.
pub const BOXPLOT_EXCLUDED: [&str; 3] = ["avg_degree", "depth", "median_children"];

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty data")]
    EmptyData,
    #[error("insufficient data: need at least {needed} values, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn sorted(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Linear-interpolation quantile at rank `(n-1)q` ("type 7").
pub fn quantile(data: &[f64], q: f64) -> Result<f64, StatsError> {
    if data.is_empty() {
        return Err(StatsError::EmptyData);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(StatsError::InvalidArgument(format!("quantile level {q} outside [0, 1]")));
    }
    Ok(quantile_sorted(&sorted(data), q))
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(data: &[f64]) -> f64 {
    let m = mean(data);
    let ss: f64 = data.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (data.len() - 1) as f64).sqrt()
}

fn require(data: &[f64], needed: usize) -> Result<(), StatsError> {
    if data.len() < needed {
        Err(StatsError::InsufficientData {
            needed,
            have: data.len(),
        })
    } else {
        Ok(())
    }
}

/// Large-sample normal interval for the mean: `mean ± 1.96 s / sqrt(n)`.
pub fn ci_mean_95(data: &[f64]) -> Result<Interval, StatsError> {
    require(data, 2)?;
    let m = mean(data);
    let half = Z_95 * sample_sd(data) / (data.len() as f64).sqrt();
    Ok(Interval {
        lo: m - half,
        hi: m + half,
    })
}

/// Wilson-Hilferty approximation of the chi-square `p`-quantile, given the
/// matching standard normal quantile `z`.
pub(crate) fn wilson_hilferty(z: f64, df: f64) -> f64 {
    let c = 2.0 / (9.0 * df);
    df * (1.0 - c + z * c.sqrt()).powi(3)
}

/// Chi-square quantile at probability 0.025 or 0.975.
fn chi_square_tail_quantile(upper: bool, df: f64) -> f64 {
    if df >= WILSON_HILFERTY_MIN_DF {
        let z = if upper { Z_975 } else { -Z_975 };
        wilson_hilferty(z, df)
    } else {
        let dist = ChiSquared::new(df).expect("positive degrees of freedom");
        dist.inverse_cdf(if upper { 0.975 } else { 0.025 })
    }
}

/// Chi-square interval for the standard deviation.
pub fn ci_sd_95(data: &[f64]) -> Result<Interval, StatsError> {
    require(data, 2)?;
    let s = sample_sd(data);
    let df = (data.len() - 1) as f64;
    Ok(Interval {
        lo: s * (df / chi_square_tail_quantile(true, df)).sqrt(),
        hi: s * (df / chi_square_tail_quantile(false, df)).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub feature: String,
    pub n: usize,
    pub q75: f64,
    pub q50: f64,
    pub q25: f64,
    pub ci_mean: Interval,
    pub ci_sd: Interval,
}

/// One summary per feature, in feature-vector order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub label: Label,
    pub features: Vec<FeatureSummary>,
}

impl SummaryTable {
    pub fn get(&self, feature: &str) -> Option<&FeatureSummary> {
        self.features.iter().find(|f| f.feature == feature)
    }

    /// Rows sorted alphabetically by feature name.
    fn ordered(&self) -> Vec<&FeatureSummary> {
        let mut rows: Vec<_> = self.features.iter().collect();
        rows.sort_by(|a, b| a.feature.cmp(&b.feature));
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,n,q75,q50,q25,ci_mean_lo,ci_mean_hi,ci_sd_lo,ci_sd_hi\n");
        for f in self.ordered() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                f.feature,
                f.n,
                sig6(f.q75),
                sig6(f.q50),
                sig6(f.q25),
                sig6(f.ci_mean.lo),
                sig6(f.ci_mean.hi),
                sig6(f.ci_sd.lo),
                sig6(f.ci_sd.hi)
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<28} {:>12} {:>12} {:>12} {:>27} {:>27}\n",
            format!("{} (n={})", self.label, self.features.first().map_or(0, |f| f.n)),
            "75%",
            "50%",
            "25%",
            "95% CI mean",
            "95% CI sd"
        );
        for f in self.ordered() {
            let _ = writeln!(
                out,
                "{:<28} {:>12} {:>12} {:>12} {:>27} {:>27}",
                f.feature,
                sig6(f.q75),
                sig6(f.q50),
                sig6(f.q25),
                format!("{} - {}", sig6(f.ci_mean.lo), sig6(f.ci_mean.hi)),
                format!("{} - {}", sig6(f.ci_sd.lo), sig6(f.ci_sd.hi)),
            );
        }
        out
    }
}

pub fn summarize(dataset: &DatasetTable, label: Label) -> Result<SummaryTable, StatsError> {
    let mut features = Vec::with_capacity(NUM_FEATURES);
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        let column = dataset.column(i, label);
        require(&column, 2)?;
        let s = sorted(&column);
        features.push(FeatureSummary {
            feature: name.to_string(),
            n: column.len(),
            q75: quantile_sorted(&s, 0.75),
            q50: quantile_sorted(&s, 0.5),
            q25: quantile_sorted(&s, 0.25),
            ci_mean: ci_mean_95(&column)?,
            ci_sd: ci_sd_95(&column)?,
        });
    }
    Ok(SummaryTable { label, features })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotRow {
    pub feature: String,
    pub n: usize,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
    /// Most extreme data points within 1.5 IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
}

pub fn boxplot_rows(dataset: &DatasetTable, label: Label) -> Result<Vec<BoxplotRow>, StatsError> {
    let mut rows = Vec::new();
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        if BOXPLOT_EXCLUDED.contains(name) {
            continue;
        }
        let column = dataset.column(i, label);
        require(&column, 2)?;
        rows.push(boxplot_row(name, &column));
    }
    rows.sort_by(|a, b| a.feature.cmp(&b.feature));
    Ok(rows)
}

fn boxplot_row(name: &str, column: &[f64]) -> BoxplotRow {
    let s = sorted(column);
    let q25 = quantile_sorted(&s, 0.25);
    let q75 = quantile_sorted(&s, 0.75);
    let iqr = q75 - q25;
    let (fence_lo, fence_hi) = (q25 - 1.5 * iqr, q75 + 1.5 * iqr);
    let inside = s.iter().copied().filter(|&x| fence_lo <= x && x <= fence_hi);
    BoxplotRow {
        feature: name.to_string(),
        n: s.len(),
        min: s[0],
        q25,
        q50: quantile_sorted(&s, 0.5),
        q75,
        max: s[s.len() - 1],
        whisker_low: inside.clone().next().unwrap_or(q25),
        whisker_high: inside.clone().next_back().unwrap_or(q75),
        outliers: s.iter().filter(|&&x| x < fence_lo || x > fence_hi).count(),
    }
}

/// Box-plot data as CSV, one row per non-discrete feature.
pub fn boxplot_export(dataset: &DatasetTable, label: Label) -> Result<String, StatsError> {
    let mut out = String::from("feature,n,min,q25,q50,q75,max,whisker_low,whisker_high,outliers\n");
    for r in boxplot_rows(dataset, label)? {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.feature,
            r.n,
            sig6(r.min),
            sig6(r.q25),
            sig6(r.q50),
            sig6(r.q75),
            sig6(r.max),
            sig6(r.whisker_low),
            sig6(r.whisker_high),
            r.outliers
        );
    }
    Ok(out)
}

/// Formats with six significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    format_significant(x, 6)
}

pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    // Round first so that e.g. 999999.5 moves to the next exponent.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
