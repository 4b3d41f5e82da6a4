use crate::dist::{sigmoid, softplus, softplus_inverse, weibull_log_lik, weibull_log_lik_dscale, weibull_median, WeibullSpec};
use crate::error::{Error, Result};
use crate::model::SCALE_FLOOR;
use crate::nn::{AdamState, Matrix};

/// Fitting controls for [`weibull_aft_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct AftOptions {
    /// Penalty on the squared norm of the non-intercept coefficients.
    pub ridge: f64,
    /// Train the shape jointly on the log scale; otherwise hold it fixed.
    pub learn_shape: bool,
    /// Starting (or fixed) shape.
    pub shape: f64,
    pub learning_rate: f64,
    pub max_steps: usize,
    /// Stop once the gradient norm of the per-row objective is below this.
    pub gradient_tolerance: f64,
}

impl Default for AftOptions {
    fn default() -> Self {
        AftOptions {
            ridge: 1e-3,
            learn_shape: true,
            shape: 1.0,
            learning_rate: 1e-2,
            max_steps: 5000,
            gradient_tolerance: 1e-6,
        }
    }
}

/// Linear Weibull regression `lambda(x) = softplus([x; 1] . w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeibullAftModel {
    /// `d + 1` entries; the last is the intercept.
    pub coefficients: Vec<f64>,
    pub shape: f64,
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AftFit {
    pub model: WeibullAftModel,
    /// Penalised objective after every step.
    pub objective: Vec<f64>,
    pub converged: bool,
}

impl WeibullAftModel {
    pub fn num_features(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn scale(&self, row: &[f64]) -> f64 {
        let d = self.num_features();
        let pre = self.coefficients[d] + row.iter().zip(&self.coefficients[..d]).map(|(a, b)| a * b).sum::<f64>();
        softplus(pre).max(SCALE_FLOOR)
    }
}

/// Penalised log-likelihood `sum_i log p(t_i | x_i) - ridge ||w||^2`, the
/// intercept unpenalised.
pub fn aft_objective(model: &WeibullAftModel, x: &Matrix, times: &[f64], events: &[bool]) -> Result<f64> {
    check_inputs(x, times, events)?;
    if x.cols() != model.num_features() {
        return Err(Error::shape("aft_objective features", model.num_features(), x.cols()));
    }
    let ll: f64 = x
        .iter_rows()
        .zip(times.iter().zip(events))
        .map(|(row, (&t, &e))| weibull_log_lik(t, e, model.scale(row), model.shape))
        .sum();
    let d = model.num_features();
    let penalty: f64 = model.coefficients[..d].iter().map(|w| w * w).sum();
    Ok(ll - model.ridge * penalty)
}

fn check_inputs(x: &Matrix, times: &[f64], events: &[bool]) -> Result<()> {
    if times.len() != x.rows() || events.len() != x.rows() {
        return Err(Error::shape(
            "Weibull AFT rows",
            x.rows(),
            format!("{} times, {} events", times.len(), events.len()),
        ));
    }
    if x.rows() == 0 {
        return Err(Error::Domain("Weibull AFT needs at least one row".into()));
    }
    if let Some(i) = times.iter().position(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::Domain(format!("survival time at row {i} must be positive, got {}", times[i])));
    }
    Ok(())
}

/// Full-batch Adam on the penalised log-likelihood divided by `N`. The
/// intercept starts at `softplus^-1(mean t)`, the slopes at zero. Returns the
/// best iterate seen.
pub fn weibull_aft_fit(x: &Matrix, times: &[f64], events: &[bool], options: &AftOptions) -> Result<AftFit> {
    check_inputs(x, times, events)?;
    if !(options.shape > 0.0 && options.shape.is_finite()) {
        return Err(Error::Config(format!("Weibull AFT shape must be positive, got {}", options.shape)));
    }
    if !(options.ridge >= 0.0) {
        return Err(Error::Config(format!("ridge must be nonnegative, got {}", options.ridge)));
    }
    let (n, d) = x.shape();
    let mean_t = times.iter().sum::<f64>() / n as f64;
    let mut w = vec![0.0; d + 1];
    w[d] = softplus_inverse(mean_t);
    let mut log_k = vec![options.shape.ln()];
    let mut adam = AdamState::new();
    let inv_n = 1.0 / n as f64;

    let mut model = WeibullAftModel {
        coefficients: w.clone(),
        shape: options.shape,
        ridge: options.ridge,
    };
    let mut best = (aft_objective(&model, x, times, events)?, model.clone());
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..options.max_steps {
        let k = log_k[0].exp();
        let mut gw = vec![0.0; d + 1];
        let mut gk = 0.0;
        for (row, (&t, &e)) in x.iter_rows().zip(times.iter().zip(events)) {
            let pre = w[d] + row.iter().zip(&w[..d]).map(|(a, b)| a * b).sum::<f64>();
            let lam = softplus(pre);
            if lam > SCALE_FLOOR {
                let dpre = weibull_log_lik_dscale(t, e, lam, k) * sigmoid(pre);
                for (g, v) in gw.iter_mut().zip(row) {
                    *g += dpre * v;
                }
                gw[d] += dpre;
            }
            let lam = lam.max(SCALE_FLOOR);
            if options.learn_shape {
                // d/dk of the log-likelihood, times k for the log scale.
                let r = t.ln() - lam.ln();
                let h = (k * r).exp();
                let delta = if e { 1.0 } else { 0.0 };
                gk += k * (delta * (1.0 / k + r) - h * r);
            }
        }
        for (g, wi) in gw[..d].iter_mut().zip(&w[..d]) {
            *g -= 2.0 * options.ridge * wi;
        }
        gw.iter_mut().for_each(|g| *g *= inv_n);
        gk *= inv_n;
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gk * gk).sqrt();
        if !norm.is_finite() {
            return Err(Error::Numerical(format!(
                "Weibull AFT diverged after {} steps; last objectives {:?}",
                trace.len(),
                &trace[trace.len().saturating_sub(5)..]
            )));
        }
        if norm < options.gradient_tolerance {
            converged = true;
            break;
        }
        let neg_w: Vec<f64> = gw.iter().map(|g| -g).collect();
        let neg_k = [-gk];
        let mut params = vec![("coefficients".to_string(), w.as_mut_slice()), ("log_shape".to_string(), log_k.as_mut_slice())];
        let grads = [("coefficients".to_string(), neg_w.as_slice()), ("log_shape".to_string(), neg_k.as_slice())];
        adam.step(&mut params, &grads, options.learning_rate)?;

        model.coefficients.copy_from_slice(&w);
        model.shape = log_k[0].exp();
        let obj = aft_objective(&model, x, times, events)?;
        if !obj.is_finite() {
            return Err(Error::Numerical(format!("Weibull AFT objective became {obj} after {} steps", trace.len() + 1)));
        }
        trace.push(obj);
        if obj > best.0 {
            best = (obj, model.clone());
        }
    }
    Ok(AftFit {
        model: best.1,
        objective: trace,
        converged,
    })
}

/// `(risk, median)` per row with `risk = -median`.
pub fn weibull_aft_predict(model: &WeibullAftModel, x: &Matrix) -> Result<Vec<(f64, f64)>> {
    if x.cols() != model.num_features() {
        return Err(Error::shape("weibull_aft_predict features", model.num_features(), x.cols()));
    }
    x.iter_rows()
        .map(|row| {
            let median = weibull_median(&WeibullSpec::new(model.scale(row), model.shape)?);
            Ok((-median, median))
        })
        .collect()
}
