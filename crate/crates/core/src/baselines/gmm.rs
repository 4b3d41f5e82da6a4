use super::kmeans::{kmeans_fit, KMeansModel, DEFAULT_RESTARTS};
use crate::dist::log_sum_exp_unchecked;
use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const VARIANCE_FLOOR: f64 = 1e-6;
pub const MAX_EM_ITERATIONS: usize = 100;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Mixture of Gaussians with diagonal covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGmmModel {
    pub weights: Vec<f64>,
    /// `K x d`.
    pub means: Matrix,
    /// `K x d`, floored at [`VARIANCE_FLOOR`].
    pub variances: Matrix,
}

/// EM output; `log_likelihood[i]` is the mean per-point log-likelihood of
/// the parameters entering iteration `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit {
    pub model: DiagGmmModel,
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
}

impl DiagGmmModel {
    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    fn component_log_densities(&self, row: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = self.weights[c].ln();
            for ((x, m), v) in row.iter().zip(self.means.row(c)).zip(self.variances.row(c)) {
                let d = x - m;
                acc -= 0.5 * (LN_2PI + v.ln() + d * d / v);
            }
            *o = acc;
        }
    }

    /// Log of the mixture density at `row`.
    pub fn log_density(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.means.cols() {
            return Err(Error::shape("DiagGmmModel::log_density", self.means.cols(), row.len()));
        }
        let mut buf = vec![0.0; self.num_components()];
        self.component_log_densities(row, &mut buf);
        Ok(log_sum_exp_unchecked(&buf))
    }

    pub fn responsibilities(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.means.cols() {
            return Err(Error::shape("DiagGmmModel::responsibilities", self.means.cols(), x.cols()));
        }
        let k = self.num_components();
        let mut out = Matrix::zeros(x.rows(), k);
        for (i, row) in x.iter_rows().enumerate() {
            let r = out.row_mut(i);
            self.component_log_densities(row, r);
            let lse = log_sum_exp_unchecked(r);
            for v in r.iter_mut() {
                *v = (*v - lse).exp();
            }
        }
        Ok(out)
    }

    /// Proportions, centres and within-cluster variances of a k-means
    /// solution.
    pub fn from_kmeans(model: &KMeansModel, x: &Matrix) -> Result<Self> {
        let labels = model.assign(x)?;
        let (k, d) = model.centers.shape();
        let mut counts = vec![0usize; k];
        let mut var = Matrix::zeros(k, d);
        for (row, &c) in x.iter_rows().zip(&labels) {
            counts[c] += 1;
            for (v, (xi, mi)) in var.row_mut(c).iter_mut().zip(row.iter().zip(model.centers.row(c))) {
                *v += (xi - mi) * (xi - mi);
            }
        }
        for (c, &count) in counts.iter().enumerate() {
            for v in var.row_mut(c) {
                *v = if count > 0 { *v / count as f64 } else { 1.0 };
                *v = v.max(VARIANCE_FLOOR);
            }
        }
        let mass: Vec<f64> = counts.iter().map(|&c| (c as f64).max(1.0)).collect();
        let total: f64 = mass.iter().sum();
        Ok(DiagGmmModel {
            weights: mass.iter().map(|m| m / total).collect(),
            means: model.centers.clone(),
            variances: var,
        })
    }
}

/// EM from a k-means start. Stops when the relative change of the mean
/// log-likelihood drops below [`RELATIVE_TOLERANCE`] or after
/// [`MAX_EM_ITERATIONS`] iterations.
pub fn gmm_em_fit(x: &Matrix, k: usize, seed: u64) -> Result<GmmFit> {
    let (n, d) = x.shape();
    if k == 0 || n < k {
        return Err(Error::Config(format!("mixture fit needs 1 <= K <= N, got K={k}, N={n}")));
    }
    let km = kmeans_fit(x, k, DEFAULT_RESTARTS, seed)?;
    let mut model = DiagGmmModel::from_kmeans(&km, x)?;
    let mut trace = Vec::new();
    let mut resp = Matrix::zeros(n, k);
    let mut converged = false;
    let mut warned = false;
    for _ in 0..MAX_EM_ITERATIONS {
        let mut ll = 0.0;
        for (i, row) in x.iter_rows().enumerate() {
            let r = resp.row_mut(i);
            model.component_log_densities(row, r);
            let lse = log_sum_exp_unchecked(r);
            ll += lse;
            for v in r.iter_mut() {
                *v = (*v - lse).exp();
            }
        }
        let ll = ll / n as f64;
        if !ll.is_finite() {
            return Err(Error::Numerical(format!("mixture log-likelihood became {ll} after {} iterations", trace.len())));
        }
        if let Some(&prev) = trace.last() {
            let prev: f64 = prev;
            if (ll - prev).abs() <= RELATIVE_TOLERANCE * prev.abs().max(f64::MIN_POSITIVE) {
                trace.push(ll);
                converged = true;
                break;
            }
        }
        trace.push(ll);

        let mass = resp.column_sums();
        let mut means = Matrix::zeros(k, d);
        let mut vars = Matrix::zeros(k, d);
        for (row, r) in x.iter_rows().zip(resp.iter_rows()) {
            for c in 0..k {
                for (m, v) in means.row_mut(c).iter_mut().zip(row) {
                    *m += r[c] * v;
                }
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                let inv = 1.0 / mass[c];
                means.row_mut(c).iter_mut().for_each(|m| *m *= inv);
            } else {
                means.row_mut(c).copy_from_slice(model.means.row(c));
            }
        }
        for (row, r) in x.iter_rows().zip(resp.iter_rows()) {
            for c in 0..k {
                let mc = means.row(c).to_vec();
                for ((v, xv), m) in vars.row_mut(c).iter_mut().zip(row).zip(&mc) {
                    *v += r[c] * (xv - m) * (xv - m);
                }
            }
        }
        for c in 0..k {
            for (jj, v) in vars.row_mut(c).iter_mut().enumerate() {
                *v = if mass[c] > 0.0 { *v / mass[c] } else { model.variances.get(c, jj) };
                if *v < VARIANCE_FLOOR {
                    if !warned {
                        log::warn!("mixture component {c} collapsed; variance floored at {VARIANCE_FLOOR}");
                        warned = true;
                    }
                    *v = VARIANCE_FLOOR;
                }
            }
        }
        model = DiagGmmModel {
            weights: mass.iter().map(|m| m / n as f64).collect(),
            means,
            variances: vars,
        };
    }
    Ok(GmmFit {
        model,
        log_likelihood: trace,
        converged,
    })
}
