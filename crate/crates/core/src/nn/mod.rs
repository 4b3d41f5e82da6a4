//! Dense-network machinery: matrices, forward and reverse passes, Adam and a
//! finite-difference oracle.

mod adam;
mod matrix;
mod net;

pub use adam::{finite_diff_grad, AdamState};
pub use matrix::{gemm, Matrix, Trans};
pub use net::{Activation, DenseLayer, DenseNet, ForwardTrace, NetGrads};
