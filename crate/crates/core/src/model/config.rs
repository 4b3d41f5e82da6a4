use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Likelihood used for the reconstruction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconLoss {
    /// Unit-variance Gaussian on real-valued features.
    Mse,
    /// Bernoulli on features in `[0, 1]`; the decoder emits logits.
    Bce,
}

impl fmt::Display for ReconLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconLoss::Mse => "mse",
            ReconLoss::Bce => "bce",
        })
    }
}

impl FromStr for ReconLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mse" => Ok(ReconLoss::Mse),
            "bce" => Ok(ReconLoss::Bce),
            other => Err(Error::Config(format!("recon_loss must be mse or bce, got {other:?}"))),
        }
    }
}

/// Training hyperparameters. The defaults are the synthetic-data recipe:
/// J=16, K=3, k=1, batch 256, lr 1e-3, 1000 epochs, MSE, no pretraining, L=1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub latent_dim: usize,
    pub num_clusters: usize,
    /// Global Weibull shape `k`; fixed, not learned.
    pub weibull_shape: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub pretrain_epochs: usize,
    pub monte_carlo_samples: usize,
    pub recon_loss: ReconLoss,
    /// Multiplier on the survival term. 0 gives the VaDE ablation.
    pub survival_weight: f64,
    /// `false` drops the mixture prior for a standard-normal one and clusters
    /// the learned latents with k-means afterwards ("VAE + Weibull").
    pub gmm_prior: bool,
    /// Hidden widths of the encoder; the decoder mirrors them.
    pub hidden_layers: Vec<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            latent_dim: 16,
            num_clusters: 3,
            weibull_shape: 1.0,
            batch_size: 256,
            learning_rate: 1e-3,
            epochs: 1000,
            pretrain_epochs: 0,
            monte_carlo_samples: 1,
            recon_loss: ReconLoss::Mse,
            survival_weight: 1.0,
            gmm_prior: true,
            hidden_layers: vec![500, 500, 2000],
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("latent_dim", self.latent_dim),
            ("num_clusters", self.num_clusters),
            ("batch_size", self.batch_size),
            ("monte_carlo_samples", self.monte_carlo_samples),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.weibull_shape > 0.0 && self.weibull_shape.is_finite()) {
            return Err(Error::Config(format!("weibull_shape must be positive, got {}", self.weibull_shape)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.survival_weight >= 0.0 && self.survival_weight.is_finite()) {
            return Err(Error::Config(format!(
                "survival_weight must be finite and nonnegative, got {}",
                self.survival_weight
            )));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        Ok(())
    }

    /// Number of mixture components actually carried by the model.
    pub fn prior_components(&self) -> usize {
        if self.gmm_prior {
            self.num_clusters
        } else {
            1
        }
    }
}
