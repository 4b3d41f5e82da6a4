use std::fmt;
use std::str::FromStr;

use super::preprocess::PreprocessStats;
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// How features are modelled by the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Real,
    /// Values in `[0, 1]`, left untouched by preprocessing.
    Binary,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Real => "real",
            FeatureKind::Binary => "binary",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "real" => Ok(FeatureKind::Real),
            "binary" => Ok(FeatureKind::Binary),
            other => Err(Error::Config(format!("feature kind must be real or binary, got {other:?}"))),
        }
    }
}

/// Rows of `(x, t, delta)` with optional true cluster labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    features: Matrix,
    times: Vec<f64>,
    events: Vec<bool>,
    labels: Option<Vec<usize>>,
    feature_kind: FeatureKind,
    stats: Option<PreprocessStats>,
}

impl SurvivalDataset {
    pub fn new(
        features: Matrix,
        times: Vec<f64>,
        events: Vec<bool>,
        labels: Option<Vec<usize>>,
        feature_kind: FeatureKind,
    ) -> Result<Self> {
        let n = features.rows();
        if times.len() != n || events.len() != n || labels.as_ref().is_some_and(|l| l.len() != n) {
            return Err(Error::shape(
                "SurvivalDataset rows",
                n,
                format!(
                    "{} times, {} events, {} labels",
                    times.len(),
                    events.len(),
                    labels.as_ref().map_or(n, |l| l.len())
                ),
            ));
        }
        if let Some(i) = times.iter().position(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Domain(format!("survival time at row {i} must be positive, got {}", times[i])));
        }
        if !features.all_finite() {
            return Err(Error::non_finite("dataset features"));
        }
        Ok(SurvivalDataset {
            features,
            times,
            events,
            labels,
            feature_kind,
            stats: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn feature_kind(&self) -> FeatureKind {
        self.feature_kind
    }

    /// Statistics this dataset was preprocessed with, if any.
    pub fn stats(&self) -> Option<&PreprocessStats> {
        self.stats.as_ref()
    }

    pub fn with_feature_kind(mut self, kind: FeatureKind) -> Self {
        self.feature_kind = kind;
        self
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub(crate) fn set_processed(&mut self, features: Matrix, times: Vec<f64>, stats: PreprocessStats) {
        self.features = features;
        self.times = times;
        self.stats = Some(stats);
    }

    /// Rows in the order given.
    pub fn subset(&self, indices: &[usize]) -> SurvivalDataset {
        SurvivalDataset {
            features: self.features.select_rows(indices),
            times: indices.iter().map(|&i| self.times[i]).collect(),
            events: indices.iter().map(|&i| self.events[i]).collect(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            feature_kind: self.feature_kind,
            stats: self.stats.clone(),
        }
    }

    pub fn censored_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.events.iter().filter(|e| !**e).count() as f64 / self.len() as f64
    }
}
