use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::config::{ReconLoss, TrainConfig};
use crate::dist::softplus;
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseNet, Matrix, NetGrads};

/// Floor applied to every Weibull scale.
pub const SCALE_FLOOR: f64 = 1e-8;
/// Encoder log-variances are clamped to `[-LOG_VAR_BOUND, LOG_VAR_BOUND]`.
pub const LOG_VAR_BOUND: f64 = 10.0;

/// Every learned quantity of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct VadescParams {
    /// `D -> ... -> 2J`: the first `J` outputs are means, the rest
    /// log-variances of `q(z|x)`.
    pub encoder: DenseNet,
    /// `J -> ... -> D`: reconstruction means (MSE) or logits (BCE).
    pub decoder: DenseNet,
    pub recon_loss: ReconLoss,
    /// Softmax gives the mixture weights.
    pub mixture_logits: Vec<f64>,
    /// `K x J`.
    pub means: Matrix,
    /// `K x J`, diagonal covariances on the log scale.
    pub log_vars: Matrix,
    /// `K x (J + 1)`; the last column is the bias.
    pub betas: Matrix,
    /// Global Weibull shape.
    pub shape: f64,
    /// Present for the model without a mixture prior: k-means centres in the
    /// latent space used for cluster labels.
    pub latent_centers: Option<Matrix>,
}

/// Gradient of the objective, laid out like the trainable parts of
/// [`VadescParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub encoder: NetGrads,
    pub decoder: NetGrads,
    pub mixture_logits: Vec<f64>,
    pub means: Matrix,
    pub log_vars: Matrix,
    pub betas: Matrix,
}

impl VadescParams {
    /// Networks get Glorot weights; the mixture starts at unit-Gaussian means,
    /// unit variances and uniform weights; survival heads get Glorot weights
    /// and zero bias.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, config: &TrainConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        let j = config.latent_dim;
        let mut enc_widths = vec![input_dim];
        enc_widths.extend(&config.hidden_layers);
        enc_widths.push(2 * j);
        let mut enc_acts = vec![Activation::Relu; config.hidden_layers.len()];
        enc_acts.push(Activation::Identity);
        let encoder = DenseNet::glorot(&enc_widths, &enc_acts, rng)?;

        let mut dec_widths = vec![j];
        dec_widths.extend(config.hidden_layers.iter().rev());
        dec_widths.push(input_dim);
        let decoder = DenseNet::glorot(&dec_widths, &enc_acts, rng)?;

        let k = config.prior_components();
        let (means, log_vars) = if config.gmm_prior {
            (
                Matrix::from_fn(k, j, |_, _| StandardNormal.sample(rng)),
                Matrix::zeros(k, j),
            )
        } else {
            (Matrix::zeros(1, j), Matrix::zeros(1, j))
        };
        let limit = (6.0 / (j + k) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
        let betas = Matrix::from_fn(k, j + 1, |_, c| if c == j { 0.0 } else { dist.sample(rng) });

        Ok(VadescParams {
            encoder,
            decoder,
            recon_loss: config.recon_loss,
            mixture_logits: vec![0.0; k],
            means,
            log_vars,
            betas,
            shape: config.weibull_shape,
            latent_centers: None,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_width()
    }

    pub fn latent_dim(&self) -> usize {
        self.means.cols()
    }

    /// Mixture components in the prior (1 without a mixture prior).
    pub fn num_components(&self) -> usize {
        self.mixture_logits.len()
    }

    /// Clusters reported by prediction.
    pub fn num_clusters(&self) -> usize {
        match &self.latent_centers {
            Some(c) => c.rows(),
            None => self.num_components(),
        }
    }

    pub fn mixture_weights(&self) -> Vec<f64> {
        softmax(&self.mixture_logits)
    }

    pub fn log_mixture_weights(&self) -> Vec<f64> {
        let lse = crate::dist::log_sum_exp_unchecked(&self.mixture_logits);
        self.mixture_logits.iter().map(|l| l - lse).collect()
    }

    /// Checks the cross-field shape invariants and finiteness.
    pub fn validate(&self) -> Result<()> {
        let j = self.latent_dim();
        let k = self.num_components();
        if self.encoder.output_width() != 2 * j {
            return Err(Error::shape("VadescParams encoder output", 2 * j, self.encoder.output_width()));
        }
        if self.decoder.input_width() != j || self.decoder.output_width() != self.encoder.input_width() {
            return Err(Error::shape(
                "VadescParams decoder",
                format!("{j} -> {}", self.encoder.input_width()),
                format!("{} -> {}", self.decoder.input_width(), self.decoder.output_width()),
            ));
        }
        if self.means.shape() != (k, j) || self.log_vars.shape() != (k, j) || self.betas.shape() != (k, j + 1) {
            return Err(Error::shape(
                "VadescParams mixture",
                format!("means/log_vars {k}x{j}, betas {k}x{}", j + 1),
                format!(
                    "{:?}/{:?}/{:?}",
                    self.means.shape(),
                    self.log_vars.shape(),
                    self.betas.shape()
                ),
            ));
        }
        if let Some(c) = &self.latent_centers {
            if c.cols() != j {
                return Err(Error::shape("VadescParams latent_centers", j, c.cols()));
            }
        }
        if !(self.shape > 0.0 && self.shape.is_finite()) {
            return Err(Error::Domain(format!("Weibull shape must be positive, got {}", self.shape)));
        }
        for (name, values) in self.tensors() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite(name));
            }
        }
        Ok(())
    }

    /// Named trainable tensors, in a fixed order shared with [`ModelGrads`].
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = self.encoder.tensors("encoder");
        out.extend(self.decoder.tensors("decoder"));
        out.push(("mixture_logits".into(), self.mixture_logits.as_slice()));
        out.push(("means".into(), self.means.as_slice()));
        out.push(("log_vars".into(), self.log_vars.as_slice()));
        out.push(("betas".into(), self.betas.as_slice()));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = self.encoder.tensors_mut("encoder");
        out.extend(self.decoder.tensors_mut("decoder"));
        out.push(("mixture_logits".into(), self.mixture_logits.as_mut_slice()));
        out.push(("means".into(), self.means.as_mut_slice()));
        out.push(("log_vars".into(), self.log_vars.as_mut_slice()));
        out.push(("betas".into(), self.betas.as_mut_slice()));
        out
    }

    /// All trainable values concatenated in [`Self::tensors`] order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        let total: usize = self.tensors().iter().map(|(_, v)| v.len()).sum();
        if total != flat.len() {
            return Err(Error::shape("VadescParams::set_flat", total, flat.len()));
        }
        let mut it = flat.iter();
        for (_, t) in self.tensors_mut() {
            for v in t.iter_mut() {
                *v = *it.next().expect("length checked");
            }
        }
        Ok(())
    }
}

/// Weibull scale `max(softplus([z; 1] . beta_c), SCALE_FLOOR)`.
pub fn weibull_scale(z: &[f64], betas: &Matrix, cluster: usize) -> f64 {
    let (scale, _) = weibull_scale_with_pre(z, betas.row(cluster));
    scale
}

/// Scale and the linear predictor it came from.
#[inline]
pub(crate) fn weibull_scale_with_pre(z: &[f64], beta: &[f64]) -> (f64, f64) {
    let j = z.len();
    let mut pre = beta[j];
    for (zi, bi) in z.iter().zip(&beta[..j]) {
        pre += zi * bi;
    }
    (softplus(pre).max(SCALE_FLOOR), pre)
}

impl ModelGrads {
    pub fn zeros_like(params: &VadescParams) -> Self {
        ModelGrads {
            encoder: NetGrads::zeros_like(&params.encoder),
            decoder: NetGrads::zeros_like(&params.decoder),
            mixture_logits: vec![0.0; params.mixture_logits.len()],
            means: Matrix::zeros(params.means.rows(), params.means.cols()),
            log_vars: Matrix::zeros(params.log_vars.rows(), params.log_vars.cols()),
            betas: Matrix::zeros(params.betas.rows(), params.betas.cols()),
        }
    }

    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = self.encoder.tensors("encoder");
        out.extend(self.decoder.tensors("decoder"));
        out.push(("mixture_logits".into(), self.mixture_logits.as_slice()));
        out.push(("means".into(), self.means.as_slice()));
        out.push(("log_vars".into(), self.log_vars.as_slice()));
        out.push(("betas".into(), self.betas.as_slice()));
        out
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }

    pub fn scale(&mut self, factor: f64) {
        self.encoder.scale(factor);
        self.decoder.scale(factor);
        for v in self
            .mixture_logits
            .iter_mut()
            .chain(self.means.as_mut_slice())
            .chain(self.log_vars.as_mut_slice())
            .chain(self.betas.as_mut_slice())
        {
            *v *= factor;
        }
    }

    /// Zeroes the mixture-prior gradients.
    pub(crate) fn freeze_prior(&mut self) {
        self.mixture_logits.iter_mut().for_each(|v| *v = 0.0);
        self.means.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
        self.log_vars.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
