//! Closed-form probability kernels: softplus, diagonal Gaussians, the
//! right-censored Weibull likelihood and stable reductions.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Distribution, Open01};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `log(1 + e^x)`, stable for large `|x|`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid, the derivative of [`softplus`].
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`softplus`] for `y > 0`.
pub fn softplus_inverse(y: f64) -> f64 {
    // log(e^y - 1) = y + log(1 - e^-y)
    y + (-(-y).exp()).ln_1p()
}

/// Mean and variance vector of a Gaussian with diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGaussianSpec {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl DiagGaussianSpec {
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.len() != var.len() {
            return Err(Error::shape("DiagGaussianSpec", mean.len(), var.len()));
        }
        check_variances(&var)?;
        Ok(DiagGaussianSpec { mean, var })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    pub fn log_density(&self, z: &[f64]) -> Result<f64> {
        log_gaussian_diag(z, self)
    }
}

fn check_variances(var: &[f64]) -> Result<()> {
    match var.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        Some(v) => Err(Error::Domain(format!("variance must be positive and finite, got {v}"))),
        None => Ok(()),
    }
}

/// `log N(z; mean, diag(var))`.
pub fn log_gaussian_diag(z: &[f64], spec: &DiagGaussianSpec) -> Result<f64> {
    if z.len() != spec.mean.len() {
        return Err(Error::shape("log_gaussian_diag", spec.mean.len(), z.len()));
    }
    Ok(z.iter()
        .zip(&spec.mean)
        .zip(&spec.var)
        .map(|((zj, mj), vj)| {
            let d = zj - mj;
            -0.5 * (LN_2PI + vj.ln() + d * d / vj)
        })
        .sum())
}

/// Log density with the variance given on the log scale; no validation.
#[inline]
pub(crate) fn log_gaussian_logvar(z: &[f64], mean: &[f64], log_var: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((zj, mj), lv) in z.iter().zip(mean).zip(log_var) {
        let d = zj - mj;
        acc += LN_2PI + lv + d * d * (-lv).exp();
    }
    -0.5 * acc
}

/// Differential entropy `J/2 log(2 pi e) + 1/2 sum log var_j`.
pub fn gaussian_entropy_diag(var: &[f64]) -> Result<f64> {
    check_variances(var)?;
    let j = var.len() as f64;
    Ok(0.5 * j * (LN_2PI + 1.0) + 0.5 * var.iter().map(|v| v.ln()).sum::<f64>())
}

/// Weibull with scale `lambda` and shape `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullSpec {
    scale: f64,
    shape: f64,
}

impl WeibullSpec {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::Domain(format!(
                "Weibull needs positive finite scale and shape, got scale={scale}, shape={shape}"
            )));
        }
        Ok(WeibullSpec { scale, shape })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        (-(t / self.scale).powf(self.shape)).exp()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        -(-(t / self.scale).powf(self.shape)).exp_m1()
    }

    pub fn median(&self) -> f64 {
        weibull_median(self)
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        self.scale * (-u.ln()).powf(1.0 / self.shape)
    }
}

/// `log f(t)` for an event, `log S(t)` for a censored row.
pub fn log_weibull_censored(t: f64, event: bool, spec: &WeibullSpec) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("survival time must be positive, got {t}")));
    }
    Ok(weibull_log_lik(t, event, spec.scale, spec.shape))
}

/// Unchecked kernel shared by the model and the AFT baseline.
#[inline]
pub(crate) fn weibull_log_lik(t: f64, event: bool, scale: f64, shape: f64) -> f64 {
    let log_ratio = t.ln() - scale.ln();
    let cum_hazard = (shape * log_ratio).exp();
    if event {
        shape.ln() - scale.ln() + (shape - 1.0) * log_ratio - cum_hazard
    } else {
        -cum_hazard
    }
}

/// Derivative of [`weibull_log_lik`] with respect to the scale:
/// `(k / lambda) ((t / lambda)^k - delta)`.
#[inline]
pub(crate) fn weibull_log_lik_dscale(t: f64, event: bool, scale: f64, shape: f64) -> f64 {
    let cum_hazard = (shape * (t.ln() - scale.ln())).exp();
    let delta = if event { 1.0 } else { 0.0 };
    shape / scale * (cum_hazard - delta)
}

/// `lambda (ln 2)^(1/k)`, where the survival function crosses one half.
pub fn weibull_median(spec: &WeibullSpec) -> f64 {
    spec.scale * LN_2.powf(1.0 / spec.shape)
}

/// Max-shifted `log sum exp(v_i)`.
pub fn log_sum_exp(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Domain("log_sum_exp of an empty vector".into()));
    }
    Ok(log_sum_exp_unchecked(v))
}

#[inline]
pub(crate) fn log_sum_exp_unchecked(v: &[f64]) -> f64 {
    if v.len() == 1 {
        return v[0];
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
