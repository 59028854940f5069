//! Building blocks for benchmarking Vanilla GAN, DCGAN and WGAN on grayscale
//! image datasets: data preparation, networks, adversarial losses, training,
//! image-quality metrics and significance testing.

pub mod data;
pub mod losses;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod stats;
pub mod tensor;
pub mod train;

pub use tensor::{ShapeError, Tensor};
