use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::ReconLoss;
use super::params::{ModelGrads, VadescParams, LOG_VAR_BOUND, SCALE_FLOOR};
use super::posterior::{component_scores, normalize_scores};
use crate::dist::{sigmoid, softplus, weibull_log_lik_dscale};
use crate::error::{Error, Result};
use crate::nn::Matrix;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A mini-batch of survival triples.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub x: &'a Matrix,
    pub times: &'a [f64],
    pub events: &'a [bool],
}

impl<'a> Batch<'a> {
    pub fn new(x: &'a Matrix, times: &'a [f64], events: &'a [bool]) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::Domain("ELBO batch is empty".into()));
        }
        if times.len() != x.rows() || events.len() != x.rows() {
            return Err(Error::shape(
                "Batch rows",
                x.rows(),
                format!("{} times, {} events", times.len(), events.len()),
            ));
        }
        if let Some(i) = times.iter().position(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Domain(format!("survival time at row {i} must be positive, got {}", times[i])));
        }
        Ok(Batch { x, times, events })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }
}

/// The five batch-averaged ELBO terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElboTerms {
    pub reconstruction: f64,
    pub survival: f64,
    pub clustering: f64,
    pub prior: f64,
    pub entropy: f64,
}

impl ElboTerms {
    pub fn total(&self) -> f64 {
        self.reconstruction + self.survival + self.clustering + self.prior + self.entropy
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("reconstruction", self.reconstruction),
            ("survival", self.survival),
            ("clustering", self.clustering),
            ("prior", self.prior),
            ("entropy", self.entropy),
        ]
    }

    fn check_finite(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() {
                return Err(Error::non_finite(format!("{name} term")));
            }
        }
        Ok(())
    }
}

/// Encoder means and clamped log-variances of `q(z | x)`.
pub fn encode(params: &VadescParams, x: &Matrix) -> Result<(Matrix, Matrix)> {
    let out = params.encoder.predict(x)?;
    let j = params.latent_dim();
    let mu = out.column_block(0, j);
    let lv = out.column_block(j, 2 * j).map(|v| v.clamp(-LOG_VAR_BOUND, LOG_VAR_BOUND));
    Ok((mu, lv))
}

/// Standard-normal noise for `samples` draws per row, stacked sample-major:
/// row `l * rows + i` belongs to input row `i`.
pub fn sample_noise<R: Rng + ?Sized>(rows: usize, latent_dim: usize, samples: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows * samples, latent_dim, |_, _| StandardNormal.sample(rng))
}

/// `z = mu + exp(lv / 2) * eps` for noise laid out as in [`sample_noise`].
pub fn reparameterize(mu: &Matrix, log_var: &Matrix, eps: &Matrix) -> Result<Matrix> {
    if mu.shape() != log_var.shape() {
        return Err(Error::shape("reparameterize", format!("{:?}", mu.shape()), format!("{:?}", log_var.shape())));
    }
    let n = mu.rows();
    if n == 0 || eps.cols() != mu.cols() || eps.rows() % n != 0 {
        return Err(Error::shape(
            "reparameterize noise",
            format!("L*{n} x {}", mu.cols()),
            format!("{:?}", eps.shape()),
        ));
    }
    Ok(Matrix::from_fn(eps.rows(), eps.cols(), |r, j| {
        let i = r % n;
        mu.get(i, j) + (0.5 * log_var.get(i, j)).exp() * eps.get(r, j)
    }))
}

/// SGVB estimate of the ELBO with fresh noise from `rng`.
pub fn elbo_terms<R: Rng + ?Sized>(
    params: &VadescParams,
    batch: &Batch<'_>,
    samples: usize,
    survival_weight: f64,
    rng: &mut R,
) -> Result<ElboTerms> {
    let eps = sample_noise(batch.len(), params.latent_dim(), samples.max(1), rng);
    elbo_terms_with_noise(params, batch, &eps, survival_weight)
}

/// ELBO for given noise; responsibilities come from the current parameters.
pub fn elbo_terms_with_noise(params: &VadescParams, batch: &Batch<'_>, eps: &Matrix, survival_weight: f64) -> Result<ElboTerms> {
    Ok(evaluate(params, batch, eps, survival_weight, None, false)?.terms)
}

/// ELBO with responsibilities held at `responsibilities` (one row per noise
/// row) instead of recomputed from `params`.
pub fn elbo_terms_frozen(
    params: &VadescParams,
    batch: &Batch<'_>,
    eps: &Matrix,
    survival_weight: f64,
    responsibilities: &Matrix,
) -> Result<ElboTerms> {
    Ok(evaluate(params, batch, eps, survival_weight, Some(responsibilities), false)?.terms)
}

/// Result of [`elbo_gradient`].
#[derive(Debug, Clone)]
pub struct ElboGradient {
    pub terms: ElboTerms,
    /// Ascent direction of the summed objective.
    pub grads: ModelGrads,
    /// Responsibilities used, `(L * B) x K`.
    pub responsibilities: Matrix,
}

/// ELBO value and its analytic gradient. Responsibilities are treated as
/// constants within the step; when `responsibilities` is `None` they are
/// computed from the current parameters.
pub fn elbo_gradient(
    params: &VadescParams,
    batch: &Batch<'_>,
    eps: &Matrix,
    survival_weight: f64,
    responsibilities: Option<&Matrix>,
) -> Result<ElboGradient> {
    let out = evaluate(params, batch, eps, survival_weight, responsibilities, true)?;
    Ok(ElboGradient {
        terms: out.terms,
        grads: out.grads.expect("gradient requested"),
        responsibilities: out.gamma,
    })
}

struct Evaluation {
    terms: ElboTerms,
    grads: Option<ModelGrads>,
    gamma: Matrix,
}

fn evaluate(
    params: &VadescParams,
    batch: &Batch<'_>,
    eps: &Matrix,
    weight: f64,
    frozen: Option<&Matrix>,
    want_grad: bool,
) -> Result<Evaluation> {
    let b = batch.len();
    let j = params.latent_dim();
    let k = params.num_components();
    if batch.x.cols() != params.input_dim() {
        return Err(Error::shape("ELBO batch features", params.input_dim(), batch.x.cols()));
    }
    if eps.cols() != j || eps.rows() == 0 || eps.rows() % b != 0 {
        return Err(Error::shape("ELBO noise", format!("L*{b} x {j}"), format!("{:?}", eps.shape())));
    }
    let l = eps.rows() / b;
    let rows = l * b;
    if let Some(g) = frozen {
        if g.shape() != (rows, k) {
            return Err(Error::shape("ELBO responsibilities", format!("{rows} x {k}"), format!("{:?}", g.shape())));
        }
    }
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(Error::Config(format!("survival_weight must be finite and nonnegative, got {weight}")));
    }

    let enc_trace = params.encoder.forward(batch.x)?;
    let enc_out = enc_trace.output();
    let mut mu = Matrix::zeros(b, j);
    let mut lv = Matrix::zeros(b, j);
    for i in 0..b {
        let row = enc_out.row(i);
        mu.row_mut(i).copy_from_slice(&row[..j]);
        for (dst, src) in lv.row_mut(i).iter_mut().zip(&row[j..]) {
            *dst = src.clamp(-LOG_VAR_BOUND, LOG_VAR_BOUND);
        }
    }
    let z = reparameterize(&mu, &lv, eps)?;
    let dec_trace = params.decoder.forward(&z)?;
    let xhat = dec_trace.output();

    let scale = 1.0 / rows as f64;
    let mut terms = ElboTerms::default();
    let mut d_xhat = if want_grad { Some(Matrix::zeros(rows, xhat.cols())) } else { None };

    let mut recon = 0.0;
    for r in 0..rows {
        let x = batch.x.row(r % b);
        let a = xhat.row(r);
        match params.recon_loss {
            ReconLoss::Mse => {
                for (xi, ai) in x.iter().zip(a) {
                    let d = xi - ai;
                    recon -= 0.5 * (d * d + LN_2PI);
                }
                if let Some(dx) = d_xhat.as_mut() {
                    for ((g, xi), ai) in dx.row_mut(r).iter_mut().zip(x).zip(a) {
                        *g = scale * (xi - ai);
                    }
                }
            }
            ReconLoss::Bce => {
                for (xi, ai) in x.iter().zip(a) {
                    recon += xi * ai - softplus(*ai);
                }
                if let Some(dx) = d_xhat.as_mut() {
                    for ((g, xi), ai) in dx.row_mut(r).iter_mut().zip(x).zip(a) {
                        *g = scale * (xi - sigmoid(*ai));
                    }
                }
            }
        }
    }
    terms.reconstruction = recon * scale;

    let log_pi = params.log_mixture_weights();
    let pi: Vec<f64> = log_pi.iter().map(|v| v.exp()).collect();
    let mut gamma = Matrix::zeros(rows, k);
    let mut grads = if want_grad { Some(ModelGrads::zeros_like(params)) } else { None };
    let mut dz = Matrix::zeros(rows, j);
    let inv_var: Vec<Vec<f64>> = (0..k)
        .map(|c| params.log_vars.row(c).iter().map(|v| (-v).exp()).collect())
        .collect();

    let (mut surv, mut clus, mut prior, mut resp_entropy) = (0.0, 0.0, 0.0, 0.0);
    for r in 0..rows {
        let i = r % b;
        let zr = z.row(r);
        let cs = component_scores(params, &log_pi, zr, Some((batch.times[i], batch.events[i], weight)));
        let g = match frozen {
            Some(f) => f.row(r).to_vec(),
            None => normalize_scores(&cs.scores)?,
        };
        gamma.row_mut(r).copy_from_slice(&g);
        for c in 0..k {
            let gc = g[c];
            if gc == 0.0 {
                continue;
            }
            if weight != 0.0 {
                surv += weight * gc * cs.log_surv[c];
            }
            clus += gc * cs.log_normal[c];
            prior += gc * log_pi[c];
            resp_entropy -= gc * gc.ln();
        }
        let Some(gr) = grads.as_mut() else { continue };
        let dzr = dz.row_mut(r);
        for c in 0..k {
            let gc = g[c];
            gr.mixture_logits[c] += scale * (gc - pi[c]);
            if gc == 0.0 {
                continue;
            }
            let mean = params.means.row(c);
            let iv = &inv_var[c];
            for jj in 0..j {
                let diff = zr[jj] - mean[jj];
                let q = diff * iv[jj];
                dzr[jj] -= scale * gc * q;
                let dm = gr.means.row_mut(c);
                dm[jj] += scale * gc * q;
                let dl = gr.log_vars.row_mut(c);
                dl[jj] += scale * gc * (-0.5 + 0.5 * diff * q);
            }
            if weight != 0.0 && cs.scale[c] > SCALE_FLOOR {
                let ds = weibull_log_lik_dscale(batch.times[i], batch.events[i], cs.scale[c], params.shape);
                let dpre = scale * weight * gc * ds * sigmoid(cs.pre[c]);
                let beta = params.betas.row(c);
                for jj in 0..j {
                    dzr[jj] += dpre * beta[jj];
                }
                let db = gr.betas.row_mut(c);
                for jj in 0..j {
                    db[jj] += dpre * zr[jj];
                }
                db[j] += dpre;
            }
        }
    }
    terms.survival = surv * scale;
    terms.clustering = clus * scale;
    terms.prior = prior * scale;
    let enc_entropy: f64 = lv.as_slice().iter().sum::<f64>() * 0.5 / b as f64 + 0.5 * j as f64 * (LN_2PI + 1.0);
    terms.entropy = enc_entropy + resp_entropy * scale;
    terms.check_finite()?;

    let Some(mut grads) = grads else {
        return Ok(Evaluation { terms, grads: None, gamma });
    };

    let d_xhat = d_xhat.expect("gradient requested");
    let (dec_grads, dz_recon) = params.decoder.backward(&dec_trace, &d_xhat)?;
    grads.decoder = dec_grads;
    for (a, bv) in dz.as_mut_slice().iter_mut().zip(dz_recon.as_slice()) {
        *a += bv;
    }

    let mut upstream = Matrix::zeros(b, 2 * j);
    let inv_b = 1.0 / b as f64;
    for r in 0..rows {
        let i = r % b;
        let dzr = dz.row(r);
        let er = eps.row(r);
        let lvr = lv.row(i);
        let up = upstream.row_mut(i);
        for jj in 0..j {
            up[jj] += dzr[jj];
            up[j + jj] += dzr[jj] * er[jj] * 0.5 * (0.5 * lvr[jj]).exp();
        }
    }
    for i in 0..b {
        let raw = enc_out.row(i);
        let up = upstream.row_mut(i);
        for jj in 0..j {
            let v = raw[j + jj];
            if v < -LOG_VAR_BOUND || v > LOG_VAR_BOUND {
                up[j + jj] = 0.0;
            } else {
                up[j + jj] += 0.5 * inv_b;
            }
        }
    }
    grads.encoder = params.encoder.backward_params(&enc_trace, &upstream)?;
    Ok(Evaluation {
        terms,
        grads: Some(grads),
        gamma,
    })
}

/// Reconstruction-only objective with `z = mu`, used for pretraining.
/// Returns the batch-mean log-likelihood and gradients for encoder and
/// decoder.
pub(crate) fn autoencoder_gradient(params: &VadescParams, x: &Matrix) -> Result<(f64, ModelGrads)> {
    let b = x.rows();
    let j = params.latent_dim();
    let enc_trace = params.encoder.forward(x)?;
    let mu = enc_trace.output().column_block(0, j);
    let dec_trace = params.decoder.forward(&mu)?;
    let xhat = dec_trace.output();
    let scale = 1.0 / b as f64;
    let mut value = 0.0;
    let mut d_xhat = Matrix::zeros(b, xhat.cols());
    for r in 0..b {
        for ((g, xi), ai) in d_xhat.row_mut(r).iter_mut().zip(x.row(r)).zip(xhat.row(r)) {
            match params.recon_loss {
                ReconLoss::Mse => {
                    let d = xi - ai;
                    value -= 0.5 * (d * d + LN_2PI);
                    *g = scale * d;
                }
                ReconLoss::Bce => {
                    value += xi * ai - softplus(*ai);
                    *g = scale * (xi - sigmoid(*ai));
                }
            }
        }
    }
    if !value.is_finite() {
        return Err(Error::non_finite("reconstruction term"));
    }
    let mut grads = ModelGrads::zeros_like(params);
    let (dec_grads, dmu) = params.decoder.backward(&dec_trace, &d_xhat)?;
    grads.decoder = dec_grads;
    let mut upstream = Matrix::zeros(b, 2 * j);
    for i in 0..b {
        upstream.row_mut(i)[..j].copy_from_slice(dmu.row(i));
    }
    grads.encoder = params.encoder.backward_params(&enc_trace, &upstream)?;
    Ok((value * scale, grads))
}
