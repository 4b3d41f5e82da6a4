//! Fully connected networks with an explicit reverse pass.
//!
//! A layer computes `y = act(x W + b)` with `W` stored `in x out`, so a
//! batch `X` (one example per row) maps to `act(X W + 1 b^T)`.

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::matrix::{gemm, Matrix, Trans};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => crate::dist::sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output, which is all the
    /// reverse pass keeps.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "sigmoid" => Some(Activation::Sigmoid),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `in x out`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn input_width(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_width(&self) -> usize {
        self.weight.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<DenseLayer>,
}

/// Everything the reverse pass needs: the input and the output of each layer.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the network input, `activations[i + 1]` the
    /// output of layer `i`.
    activations: Vec<Matrix>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("trace always holds the input")
    }

    pub fn into_output(mut self) -> Matrix {
        self.activations.pop().expect("trace always holds the input")
    }

    pub fn activations(&self) -> &[Matrix] {
        &self.activations
    }
}

/// Gradients laid out like a [`DenseNet`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl NetGrads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        NetGrads {
            weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weight.rows(), l.weight.cols()))
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            w.as_mut_slice().iter_mut().for_each(|v| *v *= factor);
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Named flat views, in the same order as [`DenseNet::tensors`].
    pub fn tensors(&self, prefix: &str) -> Vec<(String, &[f64])> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            out.push((format!("{prefix}.{i}.weight"), w.as_slice()));
            out.push((format!("{prefix}.{i}.bias"), b.as_slice()));
        }
        out
    }
}

impl DenseNet {
    /// Validates that consecutive layer widths connect.
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.output_width() {
                return Err(Error::shape(
                    "DenseNet::new bias",
                    layer.output_width(),
                    format!("{} in layer {i}", layer.bias.len()),
                ));
            }
            if let Some(next) = layers.get(i + 1) {
                if next.input_width() != layer.output_width() {
                    return Err(Error::shape(
                        "DenseNet::new widths",
                        format!("layer {} input width {}", i + 1, layer.output_width()),
                        next.input_width(),
                    ));
                }
            }
        }
        Ok(DenseNet { layers })
    }

    /// Glorot-uniform weights, zero biases. `widths` lists input, hidden and
    /// output widths; `activations` has one entry per layer.
    pub fn glorot<R: Rng + ?Sized>(widths: &[usize], activations: &[Activation], rng: &mut R) -> Result<Self> {
        if widths.len() < 2 || activations.len() != widths.len() - 1 {
            return Err(Error::Config(format!(
                "{} widths need {} activations, got {}",
                widths.len(),
                widths.len().saturating_sub(1),
                activations.len()
            )));
        }
        if widths.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let layers = widths
            .windows(2)
            .zip(activations)
            .map(|(w, &activation)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("limit is finite");
                let weight = Matrix::from_fn(fan_in, fan_out, |_, _| dist.sample(rng));
                DenseLayer {
                    weight,
                    bias: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        DenseNet::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].output_width()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, x: &Matrix) -> Result<ForwardTrace> {
        if x.cols() != self.input_width() {
            return Err(Error::shape("net_forward input", self.input_width(), x.cols()));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for layer in &self.layers {
            let input = activations.last().expect("nonempty");
            let mut out = Matrix::zeros(input.rows(), layer.output_width());
            gemm(1.0, input, Trans::No, &layer.weight, Trans::No, 0.0, &mut out)?;
            let width = out.cols();
            for row in out.as_mut_slice().chunks_exact_mut(width) {
                for (v, b) in row.iter_mut().zip(&layer.bias) {
                    *v = layer.activation.apply(*v + b);
                }
            }
            activations.push(out);
        }
        Ok(ForwardTrace { activations })
    }

    /// Forward pass that keeps only the final output.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward(x)?.into_output())
    }

    /// Reverse pass. `upstream` is the gradient of a scalar objective with
    /// respect to the network output. Returns parameter gradients and the
    /// gradient with respect to the input.
    pub fn backward(&self, trace: &ForwardTrace, upstream: &Matrix) -> Result<(NetGrads, Matrix)> {
        let (grads, input) = self.backward_inner(trace, upstream, true)?;
        Ok((grads, input.expect("requested")))
    }

    /// Reverse pass without the input gradient.
    pub fn backward_params(&self, trace: &ForwardTrace, upstream: &Matrix) -> Result<NetGrads> {
        Ok(self.backward_inner(trace, upstream, false)?.0)
    }

    fn backward_inner(
        &self,
        trace: &ForwardTrace,
        upstream: &Matrix,
        want_input: bool,
    ) -> Result<(NetGrads, Option<Matrix>)> {
        self.check_trace(trace)?;
        let output = trace.output();
        if upstream.shape() != output.shape() {
            return Err(Error::shape(
                "net_backward upstream",
                format!("{}x{}", output.rows(), output.cols()),
                format!("{}x{}", upstream.rows(), upstream.cols()),
            ));
        }

        let n = self.layers.len();
        let mut weights = Vec::with_capacity(n);
        let mut biases = Vec::with_capacity(n);
        let mut delta = upstream.clone();
        let mut input_grad = None;
        for i in (0..n).rev() {
            let layer = &self.layers[i];
            let out = &trace.activations[i + 1];
            if layer.activation != Activation::Identity {
                for (d, &y) in delta.as_mut_slice().iter_mut().zip(out.as_slice()) {
                    *d *= layer.activation.derivative_from_output(y);
                }
            }
            let input = &trace.activations[i];
            let mut dw = Matrix::zeros(layer.input_width(), layer.output_width());
            gemm(1.0, input, Trans::Yes, &delta, Trans::No, 0.0, &mut dw)?;
            weights.push(dw);
            biases.push(delta.column_sums());
            if i > 0 || want_input {
                let mut prev = Matrix::zeros(delta.rows(), layer.input_width());
                gemm(1.0, &delta, Trans::No, &layer.weight, Trans::Yes, 0.0, &mut prev)?;
                if i == 0 {
                    input_grad = Some(prev);
                    break;
                }
                delta = prev;
            }
        }
        weights.reverse();
        biases.reverse();
        Ok((NetGrads { weights, biases }, input_grad))
    }

    fn check_trace(&self, trace: &ForwardTrace) -> Result<()> {
        let acts = &trace.activations;
        if acts.len() != self.layers.len() + 1 {
            return Err(Error::shape(
                "net_backward trace depth",
                self.layers.len() + 1,
                acts.len(),
            ));
        }
        let rows = acts[0].rows();
        for (i, layer) in self.layers.iter().enumerate() {
            if acts[i].cols() != layer.input_width()
                || acts[i + 1].cols() != layer.output_width()
                || acts[i + 1].rows() != rows
            {
                return Err(Error::shape(
                    "net_backward trace layer",
                    format!("layer {i} {}->{}", layer.input_width(), layer.output_width()),
                    format!("{}->{}", acts[i].cols(), acts[i + 1].cols()),
                ));
            }
        }
        Ok(())
    }

    /// Named flat parameter views: `{prefix}.{i}.weight`, `{prefix}.{i}.bias`.
    pub fn tensors(&self, prefix: &str) -> Vec<(String, &[f64])> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("{prefix}.{i}.weight"), l.weight.as_slice()));
            out.push((format!("{prefix}.{i}.bias"), l.bias.as_slice()));
        }
        out
    }

    pub fn tensors_mut(&mut self, prefix: &str) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for (i, l) in self.layers.iter_mut().enumerate() {
            out.push((format!("{prefix}.{i}.weight"), l.weight.as_mut_slice()));
            out.push((format!("{prefix}.{i}.bias"), l.bias.as_mut_slice()));
        }
        out
    }
}
