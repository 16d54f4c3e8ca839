//! Graph neural networks with a non-local total-variation regularized softmax.

pub mod autodiff;
pub mod data;
pub mod error;
pub mod graph;
pub mod harness;
pub mod models;
pub mod regsoftmax;
pub mod synth;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
