use super::params::{weibull_scale_with_pre, VadescParams};
use crate::dist::{log_gaussian_logvar, log_sum_exp_unchecked, weibull_log_lik};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Row-stochastic `N x K` responsibilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    probs: Matrix,
}

impl Posterior {
    /// Accepts a matrix whose rows are nonnegative and sum to one within 1e-9.
    pub fn new(probs: Matrix) -> Result<Self> {
        for (i, row) in probs.iter_rows().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Numerical(format!("posterior row {i} is not a distribution: {row:?}")));
            }
        }
        Ok(Posterior { probs })
    }

    pub(crate) fn from_matrix_unchecked(probs: Matrix) -> Self {
        Posterior { probs }
    }

    pub fn probs(&self) -> &Matrix {
        &self.probs
    }

    pub fn into_matrix(self) -> Matrix {
        self.probs
    }

    pub fn num_rows(&self) -> usize {
        self.probs.rows()
    }

    pub fn num_clusters(&self) -> usize {
        self.probs.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.probs.row(i)
    }

    /// Most probable cluster per row; ties go to the lowest index.
    pub fn argmax(&self) -> Vec<usize> {
        self.probs.iter_rows().map(argmax).collect()
    }
}

/// Index of the largest entry, the first one on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Per-component pieces of the unnormalised log posterior for one latent row.
pub(crate) struct ComponentScores {
    /// `log pi_c + log N(z | mu_c, sigma_c^2) + w log p(t | z, c)`.
    pub scores: Vec<f64>,
    pub log_normal: Vec<f64>,
    /// `log p(t | z, c)`, zero when no survival factor was requested.
    pub log_surv: Vec<f64>,
    /// Linear predictors `[z; 1] . beta_c`.
    pub pre: Vec<f64>,
    /// Weibull scales after the floor.
    pub scale: Vec<f64>,
}

pub(crate) fn component_scores(
    params: &VadescParams,
    log_pi: &[f64],
    z: &[f64],
    survival: Option<(f64, bool, f64)>,
) -> ComponentScores {
    let k = params.num_components();
    let mut out = ComponentScores {
        scores: Vec::with_capacity(k),
        log_normal: Vec::with_capacity(k),
        log_surv: vec![0.0; k],
        pre: vec![0.0; k],
        scale: vec![0.0; k],
    };
    for c in 0..k {
        let ln = log_gaussian_logvar(z, params.means.row(c), params.log_vars.row(c));
        let mut score = log_pi[c] + ln;
        let (scale, pre) = weibull_scale_with_pre(z, params.betas.row(c));
        out.pre[c] = pre;
        out.scale[c] = scale;
        if let Some((t, event, weight)) = survival {
            if weight != 0.0 {
                let s = weibull_log_lik(t, event, scale, params.shape);
                out.log_surv[c] = s;
                score += weight * s;
            }
        }
        out.log_normal.push(ln);
        out.scores.push(score);
    }
    out
}

/// Softmax of log scores, failing when no component has finite mass.
pub(crate) fn normalize_scores(scores: &[f64]) -> Result<Vec<f64>> {
    let lse = log_sum_exp_unchecked(scores);
    if !lse.is_finite() {
        return Err(Error::Numerical(format!(
            "cluster posterior is undefined: log scores {scores:?} have log-sum-exp {lse}"
        )));
    }
    Ok(scores.iter().map(|s| (s - lse).exp()).collect())
}

fn check_latent(params: &VadescParams, z: &[f64]) -> Result<()> {
    if z.len() != params.latent_dim() {
        return Err(Error::shape("cluster posterior latent", params.latent_dim(), z.len()));
    }
    Ok(())
}

/// `p(c | z, t) ∝ pi_c N(z | mu_c, sigma_c^2) p(t | z, c)` with the
/// censoring-adjusted Weibull likelihood.
pub fn cluster_posterior(params: &VadescParams, z: &[f64], t: f64, event: bool) -> Result<Vec<f64>> {
    check_latent(params, z)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("survival time must be positive, got {t}")));
    }
    let log_pi = params.log_mixture_weights();
    normalize_scores(&component_scores(params, &log_pi, z, Some((t, event, 1.0))).scores)
}

/// `p(c | z) ∝ pi_c N(z | mu_c, sigma_c^2)`, used when no time is observed.
pub fn cluster_posterior_prior_only(params: &VadescParams, z: &[f64]) -> Result<Vec<f64>> {
    check_latent(params, z)?;
    let log_pi = params.log_mixture_weights();
    normalize_scores(&component_scores(params, &log_pi, z, None).scores)
}

/// Posterior over the mixture components for every row of `z`, with or
/// without the survival factor.
pub fn posterior_matrix(params: &VadescParams, z: &Matrix, survival: Option<(&[f64], &[bool])>) -> Result<Posterior> {
    if z.cols() != params.latent_dim() {
        return Err(Error::shape("posterior_matrix latent", params.latent_dim(), z.cols()));
    }
    if let Some((t, e)) = survival {
        if t.len() != z.rows() || e.len() != z.rows() {
            return Err(Error::shape(
                "posterior_matrix survival rows",
                z.rows(),
                format!("{} times, {} events", t.len(), e.len()),
            ));
        }
    }
    let log_pi = params.log_mixture_weights();
    let k = params.num_components();
    let mut probs = Matrix::zeros(z.rows(), k);
    for (i, row) in z.iter_rows().enumerate() {
        let surv = match survival {
            Some((t, e)) => {
                if !(t[i] > 0.0) || !t[i].is_finite() {
                    return Err(Error::Domain(format!("survival time at row {i} must be positive, got {}", t[i])));
                }
                Some((t[i], e[i], 1.0))
            }
            None => None,
        };
        let p = normalize_scores(&component_scores(params, &log_pi, row, surv).scores)?;
        probs.row_mut(i).copy_from_slice(&p);
    }
    Ok(Posterior::from_matrix_unchecked(probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::TrainConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_cluster(j: usize) -> VadescParams {
        let config = TrainConfig {
            latent_dim: j,
            num_clusters: 2,
            hidden_layers: vec![3],
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        VadescParams::init(2, &config, &mut rng).unwrap()
    }

    #[test]
    fn single_component_is_certain() {
        let config = TrainConfig {
            latent_dim: 2,
            num_clusters: 1,
            hidden_layers: vec![3],
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = VadescParams::init(2, &config, &mut rng).unwrap();
        assert_eq!(cluster_posterior(&p, &[0.3, 9.0], 0.5, true).unwrap(), vec![1.0]);
        assert_eq!(cluster_posterior_prior_only(&p, &[0.3, 9.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn identical_components_split_evenly() {
        let mut p = two_cluster(2);
        let row0 = p.means.row(0).to_vec();
        p.means.row_mut(1).copy_from_slice(&row0);
        let b0 = p.betas.row(0).to_vec();
        p.betas.row_mut(1).copy_from_slice(&b0);
        let post = cluster_posterior(&p, &[0.1, -0.4], 0.7, false).unwrap();
        assert!((post[0] - 0.5).abs() < 1e-15 && (post[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn survival_factor_example() {
        // Equal Gaussians; bias-only heads with softplus(b) = 1 and 2.
        let mut p = two_cluster(1);
        p.means = Matrix::zeros(2, 1);
        p.log_vars = Matrix::zeros(2, 1);
        p.betas = Matrix::from_rows(&[
            [0.0, crate::dist::softplus_inverse(1.0)],
            [0.0, crate::dist::softplus_inverse(2.0)],
        ])
        .unwrap();
        let post = cluster_posterior(&p, &[0.3], 1.0, true).unwrap();
        let a = (-1.0f64).exp();
        let b = 0.5 * (-0.5f64).exp();
        assert!((post[0] - a / (a + b)).abs() < 1e-12);
        assert!((post[0] - 0.548_137).abs() < 1e-6, "{post:?}");
    }

    #[test]
    fn prior_only_example() {
        let mut p = two_cluster(1);
        p.means = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
        p.log_vars = Matrix::zeros(2, 1);
        let post = cluster_posterior_prior_only(&p, &[0.5]).unwrap();
        let s0 = -(1.5f64 * 1.5) / 2.0;
        let s1 = -(0.5f64 * 0.5) / 2.0;
        let e = (s0 - s1).exp();
        assert!((post[0] - e / (1.0 + e)).abs() < 1e-12);
        assert!((post[1] - 0.731_058_578_630_004_9).abs() < 1e-12);
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn all_negative_infinity_is_numerical_error() {
        let err = normalize_scores(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).unwrap_err();
        assert_eq!(err.kind(), "numerical");
    }
}
