use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Open01};

use super::dataset::{FeatureKind, SurvivalDataset};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Where the image features come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MnistSource {
    /// Pixels in `[0, 1]` and their digit labels, e.g. from IDX files.
    Images { features: Matrix, digits: Vec<u8> },
    /// `rows` uniformly drawn digits encoded one-hot with Gaussian noise of
    /// standard deviation `noise`, clamped to `[0, 1]`.
    Surrogate { rows: usize, noise: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvMnistConfig {
    pub num_clusters: usize,
    pub p_cens: f64,
    /// Mean survival time `T0`; the baseline hazard is `1 / T0`.
    pub mean_time: f64,
    pub seed: u64,
}

impl Default for SurvMnistConfig {
    fn default() -> Self {
        SurvMnistConfig {
            num_clusters: 5,
            p_cens: 0.3,
            mean_time: 365.0,
            seed: 42,
        }
    }
}

/// Generating quantities kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvMnistTruth {
    /// Cluster of each digit 0-9.
    pub digit_clusters: [usize; 10],
    pub risk_scores: Vec<f64>,
    /// Exponential rates `exp(r_c) / T0`.
    pub rates: Vec<f64>,
    pub event_times: Vec<f64>,
    pub quantile: f64,
    pub censoring_time: f64,
}

/// One-hot digits plus clamped Gaussian noise.
pub fn surrogate_features<R: Rng + ?Sized>(rows: usize, noise: f64, rng: &mut R) -> Result<(Matrix, Vec<u8>)> {
    let normal = Normal::new(0.0, noise).map_err(|e| Error::Config(format!("surrogate noise {noise}: {e}")))?;
    let digits: Vec<u8> = (0..rows).map(|_| rng.random_range(0..10u8)).collect();
    let mut x = Matrix::zeros(rows, 10);
    for (i, &d) in digits.iter().enumerate() {
        for (j, v) in x.row_mut(i).iter_mut().enumerate() {
            let base = if j == d as usize { 1.0 } else { 0.0 };
            *v = (base + normal.sample(rng)).clamp(0.0, 1.0);
        }
    }
    Ok((x, digits))
}

/// Order statistic used as the `(1 - p)`-quantile: `sorted[N - ceil(N p)]`,
/// clamped to the sample, so at least `ceil(N p)` values are `>=` it.
pub fn upper_quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let above = (n as f64 * p - 1e-9).ceil().max(0.0) as usize;
    sorted[n.saturating_sub(above).min(n - 1)]
}

/// Semi-synthetic survival times driven by digit identity.
pub fn gen_survmnist(config: &SurvMnistConfig, source: MnistSource) -> Result<(SurvivalDataset, SurvMnistTruth)> {
    let k = config.num_clusters;
    if k == 0 || k > 10 {
        return Err(Error::Config(format!("survMNIST needs 1 <= K <= 10, got {k}")));
    }
    if !(0.0..1.0).contains(&config.p_cens) {
        return Err(Error::Config(format!("p_cens must lie in [0, 1), got {}", config.p_cens)));
    }
    if !(config.mean_time > 0.0 && config.mean_time.is_finite()) {
        return Err(Error::Config(format!("mean_time must be positive, got {}", config.mean_time)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (features, digits, kind) = match source {
        MnistSource::Images { features, digits } => {
            if digits.len() != features.rows() {
                return Err(Error::shape("survMNIST digits", features.rows(), digits.len()));
            }
            if let Some(d) = digits.iter().find(|d| **d > 9) {
                return Err(Error::Domain(format!("digit label {d} is not in 0..=9")));
            }
            (features, digits, FeatureKind::Binary)
        }
        MnistSource::Surrogate { rows, noise } => {
            let (x, d) = surrogate_features(rows, noise, &mut rng)?;
            (x, d, FeatureKind::Binary)
        }
    };
    let n = features.rows();
    if n == 0 {
        return Err(Error::Domain("survMNIST needs at least one image".into()));
    }

    let mut order: Vec<usize> = (0..10).collect();
    order.shuffle(&mut rng);
    let mut digit_clusters = [0usize; 10];
    for (pos, &digit) in order.iter().enumerate() {
        digit_clusters[digit] = if pos < k { pos } else { rng.random_range(0..k) };
    }
    let risk_scores: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..15.0)).collect();
    let rates: Vec<f64> = risk_scores.iter().map(|r| r.exp() / config.mean_time).collect();

    let labels: Vec<usize> = digits.iter().map(|&d| digit_clusters[d as usize]).collect();
    let event_times: Vec<f64> = labels
        .iter()
        .map(|&c| {
            let a: f64 = Open01.sample(&mut rng);
            -a.ln() / rates[c]
        })
        .collect();
    let quantile = upper_quantile(&event_times, config.p_cens);
    let lo = event_times.iter().copied().fold(f64::INFINITY, f64::min);
    let censoring_time = if quantile > lo { rng.random_range(lo..quantile) } else { lo };

    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    for &u in &event_times {
        let event = u <= censoring_time;
        events.push(event);
        times.push(if event { u } else { censoring_time });
    }
    let dataset = SurvivalDataset::new(features, times, events, Some(labels), kind)?;
    Ok((
        dataset,
        SurvMnistTruth {
            digit_clusters,
            risk_scores,
            rates,
            event_times,
            quantile,
            censoring_time,
        },
    ))
}
