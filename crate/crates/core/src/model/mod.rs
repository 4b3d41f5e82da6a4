//! The survival-clustering model: parameters, posteriors, the ELBO and its
//! gradient, training and prediction.

mod config;
mod elbo;
mod params;
mod posterior;
mod predict;
mod train;

pub use config::{ReconLoss, TrainConfig};
pub use elbo::{
    elbo_gradient, elbo_terms, elbo_terms_frozen, elbo_terms_with_noise, encode, reparameterize, sample_noise, Batch,
    ElboGradient, ElboTerms,
};
pub use params::{weibull_scale, ModelGrads, VadescParams, LOG_VAR_BOUND, SCALE_FLOOR};
pub use posterior::{argmax, cluster_posterior, cluster_posterior_prior_only, posterior_matrix, Posterior};
pub use predict::{predict, Prediction};
pub use train::{fit, fit_arrays, pretrain_init, EpochRecord, FitOutput, LATENT_KMEANS_RESTARTS};
