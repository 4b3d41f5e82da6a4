use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::TrainConfig;
use super::elbo::{autoencoder_gradient, elbo_gradient, encode, sample_noise, Batch, ElboTerms};
use super::params::{ModelGrads, VadescParams};
use crate::baselines::{gmm_em_fit, kmeans_fit, DiagGmmModel};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::nn::{AdamState, Matrix};

/// Restarts used when clustering latents without a mixture prior.
pub const LATENT_KMEANS_RESTARTS: usize = 10;

/// Batch-size-weighted means of the ELBO terms over one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub terms: ElboTerms,
}

impl EpochRecord {
    pub fn elbo(&self) -> f64 {
        self.terms.total()
    }
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub params: VadescParams,
    pub trace: Vec<EpochRecord>,
    /// Mean reconstruction log-likelihood per pretraining epoch.
    pub pretrain_trace: Vec<f64>,
}

/// Trains on a dataset whose times are already rescaled.
pub fn fit(data: &SurvivalDataset, config: &TrainConfig) -> Result<FitOutput> {
    fit_arrays(data.features(), data.times(), data.events(), config)
}

pub fn fit_arrays(x: &Matrix, times: &[f64], events: &[bool], config: &TrainConfig) -> Result<FitOutput> {
    config.validate()?;
    Batch::new(x, times, events)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = VadescParams::init(x.cols(), config, &mut rng)?;
    let (mut params, pretrain_trace) = pretrain_init(params, x, config, &mut rng)?;

    let n = x.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut adam = AdamState::new();
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sums = ElboTerms::default();
        for (bi, idx) in order.chunks(config.batch_size).enumerate() {
            let wrap = |e: Error| Error::Training {
                epoch,
                batch: bi,
                source: Box::new(e),
            };
            let xb = x.select_rows(idx);
            let tb: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
            let eb: Vec<bool> = idx.iter().map(|&i| events[i]).collect();
            let batch = Batch::new(&xb, &tb, &eb).map_err(wrap)?;
            let eps = sample_noise(idx.len(), params.latent_dim(), config.monte_carlo_samples, &mut rng);
            let step = elbo_gradient(&params, &batch, &eps, config.survival_weight, None).map_err(wrap)?;
            let mut grads = step.grads;
            if !config.gmm_prior {
                grads.freeze_prior();
            }
            descend(&mut adam, &mut params, grads, config.learning_rate).map_err(wrap)?;
            let w = idx.len() as f64;
            sums.reconstruction += w * step.terms.reconstruction;
            sums.survival += w * step.terms.survival;
            sums.clustering += w * step.terms.clustering;
            sums.prior += w * step.terms.prior;
            sums.entropy += w * step.terms.entropy;
        }
        let inv = 1.0 / n as f64;
        let terms = ElboTerms {
            reconstruction: sums.reconstruction * inv,
            survival: sums.survival * inv,
            clustering: sums.clustering * inv,
            prior: sums.prior * inv,
            entropy: sums.entropy * inv,
        };
        log::debug!("epoch {}/{}: elbo {:.6}", epoch + 1, config.epochs, terms.total());
        trace.push(EpochRecord { epoch, terms });
    }

    if !config.gmm_prior {
        let (mu, _) = encode(&params, x)?;
        let km = kmeans_fit(&mu, config.num_clusters, LATENT_KMEANS_RESTARTS, config.seed)?;
        params.latent_centers = Some(km.centers);
    }
    Ok(FitOutput {
        params,
        trace,
        pretrain_trace,
    })
}

fn descend(adam: &mut AdamState, params: &mut VadescParams, mut grads: ModelGrads, lr: f64) -> Result<()> {
    grads.scale(-1.0);
    let g = grads.tensors();
    let mut p = params.tensors_mut();
    adam.step(&mut p, &g, lr)
}

/// Autoencoder pretraining followed by a mixture fit on the encoded means.
/// With no pretraining epochs the parameters are returned as initialised.
pub fn pretrain_init<R: Rng + ?Sized>(
    mut params: VadescParams,
    x: &Matrix,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<(VadescParams, Vec<f64>)> {
    if config.pretrain_epochs == 0 {
        return Ok((params, Vec::new()));
    }
    let n = x.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut adam = AdamState::new();
    let mut trace = Vec::with_capacity(config.pretrain_epochs);
    for epoch in 0..config.pretrain_epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for (bi, idx) in order.chunks(config.batch_size).enumerate() {
            let wrap = |e: Error| Error::Training {
                epoch,
                batch: bi,
                source: Box::new(e),
            };
            let xb = x.select_rows(idx);
            let (value, grads) = autoencoder_gradient(&params, &xb).map_err(wrap)?;
            descend(&mut adam, &mut params, grads, config.learning_rate).map_err(wrap)?;
            total += value * idx.len() as f64;
        }
        trace.push(total / n as f64);
        log::debug!("pretrain epoch {}/{}: reconstruction {:.6}", epoch + 1, config.pretrain_epochs, total / n as f64);
    }

    if config.gmm_prior {
        let (mu, _) = encode(&params, x)?;
        let gmm = match gmm_em_fit(&mu, config.num_clusters, config.seed) {
            Ok(fit) => fit.model,
            Err(e) => {
                log::warn!("mixture fit on pretrained latents failed ({e}); using k-means statistics");
                let km = kmeans_fit(&mu, config.num_clusters, LATENT_KMEANS_RESTARTS, config.seed)?;
                DiagGmmModel::from_kmeans(&km, &mu)?
            }
        };
        copy_mixture(&mut params, &gmm);
    }
    Ok((params, trace))
}

fn copy_mixture(params: &mut VadescParams, gmm: &DiagGmmModel) {
    params.mixture_logits = gmm.weights.iter().map(|w| w.max(1e-300).ln()).collect();
    params.means = gmm.means.clone();
    params.log_vars = gmm.variances.map(f64::ln);
}
