//! Comparison methods: k-means, diagonal-covariance EM and a linear Weibull
//! AFT regression.

mod aft;
mod gmm;
mod kmeans;

pub use aft::{aft_objective, weibull_aft_fit, weibull_aft_predict, AftFit, AftOptions, WeibullAftModel};
pub use gmm::{gmm_em_fit, DiagGmmModel, GmmFit, MAX_EM_ITERATIONS, RELATIVE_TOLERANCE, VARIANCE_FLOOR};
pub use kmeans::{kmeans_assign, kmeans_fit, KMeansModel, DEFAULT_RESTARTS, MAX_ITERATIONS};
