//! A small feed-forward network engine: layer specs, named parameter
//! stores, and training/evaluation forward passes with exact backprop.

pub mod archive;
mod layer;
mod network;
pub(crate) mod ops;
mod params;

use thiserror::Error;

pub use archive::{Archive, ArchiveError};
pub use layer::LayerSpec;
pub use network::{Head, Mode, NetworkSpec, Tape};
pub use params::{count_layers, Gradients, ParameterStore, INIT_STD};

use crate::tensor::ShapeError;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("shape mismatch in {context}: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        context: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("missing parameter {0}")]
    MissingParameter(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

impl From<ShapeError> for NetError {
    fn from(e: ShapeError) -> Self {
        NetError::ShapeMismatch {
            context: "tensor".into(),
            expected: e.expected,
            actual: e.actual,
        }
    }
}
