//! The three model families as concrete layer graphs, plus latent sampling,
//! critic weight clipping and a direct-summation 1-D convolution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{Head, LayerSpec, NetError, NetworkSpec, ParameterStore};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unsupported image shape {0:?}: need square, power-of-two side >= 8")]
    UnsupportedShape(Vec<usize>),
    #[error("latent dimension must be at least 1")]
    InvalidLatentDim,
    #[error("convolution input is empty")]
    EmptyInput,
    #[error("clip value must be positive, got {0}")]
    NonPositiveClip(f64),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Vanilla,
    Dcgan,
    Wgan,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Vanilla, ModelFamily::Dcgan, ModelFamily::Wgan];

    /// Position in [`Self::ALL`]; used to derive per-family seeds.
    pub fn index(self) -> u64 {
        match self {
            ModelFamily::Vanilla => 0,
            ModelFamily::Dcgan => 1,
            ModelFamily::Wgan => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Vanilla => "vanilla",
            ModelFamily::Dcgan => "dcgan",
            ModelFamily::Wgan => "wgan",
        }
    }

    /// Human-readable name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelFamily::Vanilla => "Vanilla GAN",
            ModelFamily::Dcgan => "DCGAN",
            ModelFamily::Wgan => "WGAN",
        }
    }

    pub fn is_wasserstein(self) -> bool {
        self == ModelFamily::Wgan
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vanilla" => Ok(ModelFamily::Vanilla),
            "dcgan" => Ok(ModelFamily::Dcgan),
            "wgan" => Ok(ModelFamily::Wgan),
            other => Err(format!("unknown model family '{other}'")),
        }
    }
}

/// Widths and regularization knobs of the built networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchitectureConfig {
    /// Channels produced by the generator's dense projection (spatial 4×4);
    /// halved by every upsampling block, never below 8.
    pub generator_channels: usize,
    /// Channels of the first discriminator block; doubled by every block.
    pub discriminator_channels: usize,
    /// Hidden widths of the fully-connected Vanilla generator.
    pub vanilla_hidden: Vec<usize>,
    pub leaky_slope: f64,
    pub dropout: f64,
    pub batch_norm_momentum: f64,
    pub batch_norm_eps: f64,
}

impl Default for ArchitectureConfig {
    fn default() -> Self {
        Self {
            generator_channels: 256,
            discriminator_channels: 64,
            vanilla_hidden: vec![256, 512, 1024],
            leaky_slope: 0.2,
            dropout: 0.3,
            batch_norm_momentum: 0.1,
            batch_norm_eps: 1e-5,
        }
    }
}

/// `[channels, height, width]` of one image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl ImageShape {
    pub fn grayscale(side: usize) -> Self {
        Self {
            channels: 1,
            height: side,
            width: side,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.channels, self.height, self.width]
    }

    /// Number of stride-2 blocks between this side and 4×4.
    fn blocks(&self) -> Result<usize, ModelError> {
        let side = self.height;
        if self.channels == 0 || self.width != side || side < 8 || !side.is_power_of_two() {
            return Err(ModelError::UnsupportedShape(self.dims()));
        }
        Ok((side / 4).trailing_zeros() as usize)
    }
}

const START_SIDE: usize = 4;
const MIN_CHANNELS: usize = 8;

fn bn(features: usize, arch: &ArchitectureConfig) -> LayerSpec {
    LayerSpec::BatchNorm {
        features,
        momentum: arch.batch_norm_momentum,
        eps: arch.batch_norm_eps,
    }
}

pub fn build_generator(
    family: ModelFamily,
    latent_dim: usize,
    out_shape: ImageShape,
) -> Result<NetworkSpec, ModelError> {
    build_generator_with(
        family,
        latent_dim,
        out_shape,
        &ArchitectureConfig::default(),
    )
}

/// Vanilla: a stack of dense layers reshaped to the image. DCGAN and WGAN:
/// dense projection to 4×4, then `[transposed conv ×2, batch norm, leaky ReLU]`
/// blocks up to the output side and a 3×3 conv to the output channels.
/// Every generator ends in `tanh`.
pub fn build_generator_with(
    family: ModelFamily,
    latent_dim: usize,
    out_shape: ImageShape,
    arch: &ArchitectureConfig,
) -> Result<NetworkSpec, ModelError> {
    if latent_dim == 0 {
        return Err(ModelError::InvalidLatentDim);
    }
    let blocks = out_shape.blocks()?;
    let slope = arch.leaky_slope;
    let mut layers = Vec::new();
    match family {
        ModelFamily::Vanilla => {
            let mut width = latent_dim;
            for &h in &arch.vanilla_hidden {
                layers.push(LayerSpec::Dense {
                    inputs: width,
                    outputs: h,
                });
                layers.push(LayerSpec::LeakyRelu { slope });
                width = h;
            }
            let pixels = out_shape.channels * out_shape.height * out_shape.width;
            layers.push(LayerSpec::Dense {
                inputs: width,
                outputs: pixels,
            });
            layers.push(LayerSpec::Reshape {
                shape: out_shape.dims(),
            });
        }
        ModelFamily::Dcgan | ModelFamily::Wgan => {
            let mut ch = arch.generator_channels.max(MIN_CHANNELS);
            layers.push(LayerSpec::Dense {
                inputs: latent_dim,
                outputs: ch * START_SIDE * START_SIDE,
            });
            layers.push(LayerSpec::Reshape {
                shape: vec![ch, START_SIDE, START_SIDE],
            });
            for _ in 0..blocks {
                let next = (ch / 2).max(MIN_CHANNELS);
                layers.push(LayerSpec::TransposedConv2d {
                    in_channels: ch,
                    out_channels: next,
                    kernel: 4,
                    stride: 2,
                    padding: 1,
                });
                layers.push(bn(next, arch));
                layers.push(LayerSpec::LeakyRelu { slope });
                ch = next;
            }
            layers.push(LayerSpec::Conv2d {
                in_channels: ch,
                out_channels: out_shape.channels,
                kernel: 3,
                stride: 1,
                padding: 1,
            });
        }
    }
    layers.push(LayerSpec::Tanh);
    Ok(NetworkSpec::new(layers, vec![latent_dim], Head::Tanh)?)
}

pub fn build_discriminator(
    family: ModelFamily,
    in_shape: ImageShape,
) -> Result<NetworkSpec, ModelError> {
    build_discriminator_with(family, in_shape, &ArchitectureConfig::default())
}

/// Strided-conv blocks halving the side down to 4×4, then flatten and a dense
/// unit. Vanilla blocks add dropout; DCGAN blocks after the first add batch
/// norm; the WGAN critic has neither and keeps a linear head.
pub fn build_discriminator_with(
    family: ModelFamily,
    in_shape: ImageShape,
    arch: &ArchitectureConfig,
) -> Result<NetworkSpec, ModelError> {
    let blocks = in_shape.blocks()?;
    let slope = arch.leaky_slope;
    let mut layers = Vec::new();
    let mut ch_in = in_shape.channels;
    let mut ch = arch.discriminator_channels.max(1);
    for b in 0..blocks {
        layers.push(LayerSpec::Conv2d {
            in_channels: ch_in,
            out_channels: ch,
            kernel: 4,
            stride: 2,
            padding: 1,
        });
        if family == ModelFamily::Dcgan && b > 0 {
            layers.push(bn(ch, arch));
        }
        layers.push(LayerSpec::LeakyRelu { slope });
        if family == ModelFamily::Vanilla {
            layers.push(LayerSpec::Dropout { p: arch.dropout });
        }
        ch_in = ch;
        ch *= 2;
    }
    layers.push(LayerSpec::Flatten);
    layers.push(LayerSpec::Dense {
        inputs: ch_in * START_SIDE * START_SIDE,
        outputs: 1,
    });
    let head = if family.is_wasserstein() {
        Head::Linear
    } else {
        layers.push(LayerSpec::Sigmoid);
        Head::Sigmoid
    };
    Ok(NetworkSpec::new(layers, in_shape.dims(), head)?)
}

/// Generator and discriminator (or critic) of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanArchitecture {
    pub family: ModelFamily,
    pub latent_dim: usize,
    pub image: ImageShape,
    pub config: ArchitectureConfig,
    pub generator: NetworkSpec,
    pub discriminator: NetworkSpec,
}

impl GanArchitecture {
    pub fn build(
        family: ModelFamily,
        latent_dim: usize,
        image: ImageShape,
        config: &ArchitectureConfig,
    ) -> Result<Self, ModelError> {
        Ok(Self {
            family,
            latent_dim,
            image,
            config: config.clone(),
            generator: build_generator_with(family, latent_dim, image, config)?,
            discriminator: build_discriminator_with(family, image, config)?,
        })
    }
}

/// Full discrete convolution `y[n] = Σ_k h[k]·x[n−k]`, length `|h|+|x|−1`.
pub fn reference_convolve_1d(h: &[f64], x: &[f64]) -> Result<Vec<f64>, ModelError> {
    if h.is_empty() || x.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    let mut y = vec![0.0; h.len() + x.len() - 1];
    for (n, out) in y.iter_mut().enumerate() {
        for (k, &hk) in h.iter().enumerate() {
            if let Some(j) = n.checked_sub(k) {
                if let Some(&xj) = x.get(j) {
                    *out += hk * xj;
                }
            }
        }
    }
    Ok(y)
}

/// `n × dim` matrix of i.i.d. standard normal draws.
pub fn sample_latent<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Tensor {
    assert!(n >= 1 && dim >= 1, "latent batch must be non-empty");
    let data = (0..n * dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Tensor::from_vec(vec![n, dim], data).expect("sized")
}

/// Clamps every trainable value into `[-c, c]`.
pub fn clip_parameters(params: &ParameterStore, c: f64) -> Result<ParameterStore, ModelError> {
    let mut out = params.clone();
    clip_parameters_in_place(&mut out, c)?;
    Ok(out)
}

pub fn clip_parameters_in_place(params: &mut ParameterStore, c: f64) -> Result<(), ModelError> {
    if !(c > 0.0) {
        return Err(ModelError::NonPositiveClip(c));
    }
    for (_, t) in params.tensors_mut() {
        t.data_mut().iter_mut().for_each(|w| *w = w.clamp(-c, c));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::count_layers;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vanilla_generator_maps_latent_to_image() {
        let g = build_generator(ModelFamily::Vanilla, 100, ImageShape::grayscale(64)).unwrap();
        assert_eq!(g.input_shape(), &[100]);
        assert_eq!(g.output_shape(), &[1, 64, 64]);
        assert_eq!(g.head(), Head::Tanh);
    }

    #[test]
    fn dcgan_generator_has_transposed_convs_and_batch_norm() {
        let g = build_generator(ModelFamily::Dcgan, 100, ImageShape::grayscale(64)).unwrap();
        assert!(count_layers(&g, |l| matches!(l, LayerSpec::TransposedConv2d { .. })) >= 1);
        assert!(count_layers(&g, |l| matches!(l, LayerSpec::BatchNorm { .. })) >= 1);
        assert_eq!(g.output_shape(), &[1, 64, 64]);
        assert!(matches!(
            build_generator(ModelFamily::Dcgan, 100, ImageShape::grayscale(100)),
            Err(ModelError::UnsupportedShape(_))
        ));
    }

    #[test]
    fn dcgan_generator_default_projection_is_4x4x256() {
        let g = build_generator(ModelFamily::Dcgan, 100, ImageShape::grayscale(32)).unwrap();
        assert_eq!(
            g.layers()[0],
            LayerSpec::Dense {
                inputs: 100,
                outputs: 4 * 4 * 256
            }
        );
        assert_eq!(
            count_layers(&g, |l| matches!(l, LayerSpec::TransposedConv2d { .. })),
            3
        );
    }

    #[test]
    fn discriminator_heads_per_family() {
        let shape = ImageShape::grayscale(64);
        let w = build_discriminator(ModelFamily::Wgan, shape).unwrap();
        assert_eq!(w.head(), Head::Linear);
        assert_eq!(
            count_layers(&w, |l| matches!(l, LayerSpec::BatchNorm { .. })),
            0
        );
        let v = build_discriminator(ModelFamily::Vanilla, shape).unwrap();
        assert_eq!(v.head(), Head::Sigmoid);
        assert!(count_layers(&v, |l| matches!(l, LayerSpec::Dropout { .. })) > 0);
        let d = build_discriminator(ModelFamily::Dcgan, shape).unwrap();
        assert_eq!(d.head(), Head::Sigmoid);
        assert_eq!(d.output_shape(), &[1]);
    }

    #[test]
    fn dcgan_discriminator_convs_halve_spatial_dims() {
        let d = build_discriminator(ModelFamily::Dcgan, ImageShape::grayscale(64)).unwrap();
        let mut shape = d.input_shape().to_vec();
        for layer in d.layers() {
            let next = layer.output_shape(&shape).unwrap();
            if matches!(layer, LayerSpec::Conv2d { .. }) {
                assert_eq!(next[1] * 2, shape[1]);
                assert_eq!(next[2] * 2, shape[2]);
            }
            shape = next;
        }
    }

    #[test]
    fn convolve_examples() {
        assert_eq!(
            reference_convolve_1d(&[1.0], &[2.0, 3.0, 4.0]).unwrap(),
            vec![2.0, 3.0, 4.0]
        );
        assert_eq!(
            reference_convolve_1d(&[1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 3.0, 3.0, 2.0]
        );
        assert_eq!(
            reference_convolve_1d(&[0.0, 0.0], &[5.0, -1.0]).unwrap(),
            vec![0.0; 3]
        );
        assert!(matches!(
            reference_convolve_1d(&[], &[1.0]),
            Err(ModelError::EmptyInput)
        ));
    }

    #[test]
    fn latent_shape_and_determinism() {
        let a = sample_latent(2, 100, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_latent(2, 100, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a.shape(), &[2, 100]);
        assert_eq!(a, b);
    }

    #[test]
    fn latent_moments() {
        let z = sample_latent(10_000, 8, &mut ChaCha8Rng::seed_from_u64(11));
        for col in 0..8 {
            let vals: Vec<f64> = (0..10_000).map(|r| z.data()[r * 8 + col]).collect();
            let mean = vals.iter().sum::<f64>() / 10_000.0;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 10_000.0;
            assert!(mean.abs() < 0.05, "mean {mean}");
            assert!((var - 1.0).abs() < 0.1, "var {var}");
        }
    }

    #[test]
    fn clipping_examples() {
        let spec = NetworkSpec::new(
            vec![LayerSpec::Dense {
                inputs: 1,
                outputs: 2,
            }],
            vec![1],
            Head::Linear,
        )
        .unwrap();
        let mut p = ParameterStore::zeros(&spec);
        p.set_flat_values(&[0.0, 0.0, 0.05, -0.5]);
        let c = clip_parameters(&p, 0.01).unwrap();
        assert_eq!(c.flat_values(), vec![0.0, 0.0, 0.01, -0.01]);
        assert_eq!(clip_parameters(&c, 0.01).unwrap(), c);
        assert!(matches!(
            clip_parameters(&p, 0.0),
            Err(ModelError::NonPositiveClip(_))
        ));
    }
}
