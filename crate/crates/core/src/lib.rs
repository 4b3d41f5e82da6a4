//! Variational deep survival clustering: a VAE with a Gaussian-mixture prior
//! whose components each carry a Weibull survival regression.
//!
//! The crate bundles the dense-network machinery, probability kernels, the
//! model and its training loop, baselines, data generators and evaluation
//! metrics.

pub mod baselines;
pub mod data;
pub mod dist;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod nn;

pub use data::{FeatureKind, PreprocessStats, SurvivalDataset};
pub use error::{Error, Location, Result};
pub use metrics::MetricsReport;
pub use model::{predict, fit, Posterior, Prediction, ReconLoss, TrainConfig, VadescParams};
pub use nn::Matrix;
