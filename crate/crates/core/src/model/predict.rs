use super::elbo::encode;
use super::params::{weibull_scale, VadescParams};
use super::posterior::{posterior_matrix, Posterior};
use crate::dist::{weibull_median, WeibullSpec};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Per-row outputs of [`predict`], computed at `z = mu_theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Argmax of `posterior`.
    pub labels: Vec<usize>,
    /// `p(c | z, t)` when survival data was supplied, else `p(c | z)`.
    pub posterior: Posterior,
    /// `p(c | z)` regardless of the inputs.
    pub posterior_no_time: Posterior,
    pub latent: Matrix,
    /// Posterior-weighted mixture of cluster medians under `p(c | z)`.
    pub median_time: Vec<f64>,
}

impl Prediction {
    /// Argmax of the time-free posterior.
    pub fn labels_no_time(&self) -> Vec<usize> {
        self.posterior_no_time.argmax()
    }
}

pub fn predict(params: &VadescParams, x: &Matrix, survival: Option<(&[f64], &[bool])>) -> Result<Prediction> {
    if x.cols() != params.input_dim() {
        return Err(Error::shape("predict features", params.input_dim(), x.cols()));
    }
    let (latent, _) = encode(params, x)?;
    let no_time = posterior_matrix(params, &latent, None)?;
    let median_time = latent
        .iter_rows()
        .enumerate()
        .map(|(i, z)| {
            (0..params.num_components())
                .map(|c| {
                    let spec = WeibullSpec::new(weibull_scale(z, &params.betas, c), params.shape)?;
                    Ok(no_time.row(i)[c] * weibull_median(&spec))
                })
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;

    if let Some(centers) = &params.latent_centers {
        let labels = nearest_center(&latent, centers);
        let hard = one_hot(&labels, centers.rows());
        return Ok(Prediction {
            labels,
            posterior: hard.clone(),
            posterior_no_time: hard,
            latent,
            median_time,
        });
    }

    let posterior = match survival {
        Some(s) => posterior_matrix(params, &latent, Some(s))?,
        None => no_time.clone(),
    };
    Ok(Prediction {
        labels: posterior.argmax(),
        posterior,
        posterior_no_time: no_time,
        latent,
        median_time,
    })
}

fn nearest_center(z: &Matrix, centers: &Matrix) -> Vec<usize> {
    z.iter_rows()
        .map(|row| {
            let mut best = (0, f64::INFINITY);
            for (c, center) in centers.iter_rows().enumerate() {
                let d: f64 = row.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best.1 {
                    best = (c, d);
                }
            }
            best.0
        })
        .collect()
}

fn one_hot(labels: &[usize], k: usize) -> Posterior {
    let mut m = Matrix::zeros(labels.len(), k);
    for (i, &c) in labels.iter().enumerate() {
        m.set(i, c, 1.0);
    }
    Posterior::from_matrix_unchecked(m)
}
