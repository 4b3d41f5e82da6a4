use super::dataset::{FeatureKind, SurvivalDataset};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Offset added to rescaled times.
pub const TIME_OFFSET: f64 = 0.001;
/// Floor on feature standard deviations.
pub const STD_FLOOR: f64 = 1e-8;

/// Training-split statistics: the largest time and, for real features, the
/// per-column mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessStats {
    pub max_time: f64,
    pub feature_kind: FeatureKind,
    /// Empty for binary features.
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl PreprocessStats {
    /// Population statistics of the raw training split.
    pub fn from_train(train: &SurvivalDataset) -> Result<Self> {
        if train.stats().is_some() {
            return Err(Error::Config("statistics must come from unprocessed training data".into()));
        }
        if train.is_empty() {
            return Err(Error::Domain("cannot compute preprocessing statistics of an empty dataset".into()));
        }
        let max_time = train.times().iter().copied().fold(f64::MIN, f64::max);
        let (means, stds) = match train.feature_kind() {
            FeatureKind::Binary => (Vec::new(), Vec::new()),
            FeatureKind::Real => {
                let x = train.features();
                let n = x.rows() as f64;
                let means: Vec<f64> = x.column_sums().into_iter().map(|s| s / n).collect();
                let mut var = vec![0.0; x.cols()];
                for row in x.iter_rows() {
                    for ((v, xi), m) in var.iter_mut().zip(row).zip(&means) {
                        *v += (xi - m) * (xi - m);
                    }
                }
                let stds = var.into_iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
                (means, stds)
            }
        };
        Ok(PreprocessStats {
            max_time,
            feature_kind: train.feature_kind(),
            means,
            stds,
        })
    }

    pub fn scale_time(&self, t: f64) -> f64 {
        TIME_OFFSET + t / self.max_time
    }

    /// Inverse of [`Self::scale_time`], kept strictly positive.
    pub fn unscale_time(&self, t: f64) -> f64 {
        ((t - TIME_OFFSET) * self.max_time).max(self.max_time * 1e-12)
    }
}

/// Applies `stats`. Data already processed with the same statistics is
/// returned unchanged.
pub fn preprocess(dataset: &SurvivalDataset, stats: &PreprocessStats) -> Result<SurvivalDataset> {
    if let Some(existing) = dataset.stats() {
        if existing == stats {
            return Ok(dataset.clone());
        }
        return Err(Error::Config("dataset was already preprocessed with different statistics".into()));
    }
    if dataset.feature_kind() != stats.feature_kind {
        return Err(Error::Config(format!(
            "statistics are for {} features but the dataset has {} features",
            stats.feature_kind,
            dataset.feature_kind()
        )));
    }
    let x = dataset.features();
    let features = match stats.feature_kind {
        FeatureKind::Binary => x.clone(),
        FeatureKind::Real => {
            if stats.means.len() != x.cols() {
                return Err(Error::shape("preprocess features", stats.means.len(), x.cols()));
            }
            Matrix::from_fn(x.rows(), x.cols(), |i, j| (x.get(i, j) - stats.means[j]) / stats.stds[j])
        }
    };
    let times = dataset.times().iter().map(|&t| stats.scale_time(t)).collect();
    let mut out = dataset.clone();
    out.set_processed(features, times, stats.clone());
    Ok(out)
}

/// Statistics from `train`, applied to it.
pub fn fit_preprocess(train: &SurvivalDataset) -> Result<(SurvivalDataset, PreprocessStats)> {
    let stats = PreprocessStats::from_train(train)?;
    Ok((preprocess(train, &stats)?, stats))
}
