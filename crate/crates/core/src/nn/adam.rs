use crate::error::{Error, Result};

/// Adam with bias correction. Moments are allocated on the first step and
/// must keep the same layout afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl Default for AdamState {
    fn default() -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first: Vec::new(),
            second: Vec::new(),
            step: 0,
        }
    }
}

impl AdamState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One descent step: `params` move against `grads`. Nothing is mutated
    /// unless every gradient is finite and every shape agrees.
    pub fn step(&mut self, params: &mut [(String, &mut [f64])], grads: &[(String, &[f64])], lr: f64) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::shape("adam_step tensor count", params.len(), grads.len()));
        }
        for ((pname, p), (gname, g)) in params.iter().zip(grads) {
            if pname != gname || p.len() != g.len() {
                return Err(Error::shape(
                    "adam_step tensor",
                    format!("{pname}[{}]", p.len()),
                    format!("{gname}[{}]", g.len()),
                ));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite(format!("gradient of {gname}")));
            }
        }
        if self.step == 0 && self.first.is_empty() {
            self.first = grads.iter().map(|(_, g)| vec![0.0; g.len()]).collect();
            self.second = self.first.clone();
        } else if self.first.len() != grads.len()
            || self.first.iter().zip(grads).any(|(m, (_, g))| m.len() != g.len())
        {
            return Err(Error::shape(
                "adam_step moment layout",
                self.first.len(),
                grads.len(),
            ));
        }

        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for (((_, p), (_, g)), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            for (((pi, &gi), mi), vi) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + (1.0 - b1) * gi;
                *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *pi -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

/// Central differences `(f(p + eps e_i) - f(p - eps e_i)) / (2 eps)` for
/// every coordinate.
pub fn finite_diff_grad(mut loss: impl FnMut(&[f64]) -> f64, params: &[f64], eps: f64) -> Vec<f64> {
    assert!(eps > 0.0, "finite_diff_grad needs eps > 0");
    let mut probe = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let up = loss(&probe);
        probe[i] = orig - eps;
        let down = loss(&probe);
        probe[i] = orig;
        grad.push((up - down) / (2.0 * eps));
    }
    grad
}
