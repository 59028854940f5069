use serde::{Deserialize, Serialize};

use super::NetError;

/// One layer of a feed-forward network. Serialized with a `kind` tag so the
/// architecture can be written into run manifests and rebuilt from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSpec {
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    TransposedConv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    BatchNorm {
        features: usize,
        momentum: f64,
        eps: f64,
    },
    LeakyRelu {
        slope: f64,
    },
    Sigmoid,
    Tanh,
    Dropout {
        p: f64,
    },
    Reshape {
        shape: Vec<usize>,
    },
    Flatten,
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::TransposedConv2d { .. } => "transposed_conv2d",
            LayerSpec::BatchNorm { .. } => "batch_norm",
            LayerSpec::LeakyRelu { .. } => "leaky_relu",
            LayerSpec::Sigmoid => "sigmoid",
            LayerSpec::Tanh => "tanh",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::Reshape { .. } => "reshape",
            LayerSpec::Flatten => "flatten",
        }
    }

    /// Checks the kind-specific parameters on their own, without an input shape.
    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |msg: String| Err(NetError::InvalidLayer(msg));
        match *self {
            LayerSpec::Dense { inputs, outputs } if inputs == 0 || outputs == 0 => {
                bad(format!("dense dims must be positive ({inputs}->{outputs})"))
            }
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                ..
            }
            | LayerSpec::TransposedConv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                ..
            } if in_channels == 0 || out_channels == 0 || kernel == 0 || stride == 0 => {
                bad(format!(
                    "{} channels, kernel and stride must be positive",
                    self.kind()
                ))
            }
            LayerSpec::BatchNorm {
                features,
                momentum,
                eps,
            } if features == 0 || !(0.0..=1.0).contains(&momentum) || eps <= 0.0 => {
                bad("batch_norm needs features > 0, momentum in [0,1], eps > 0".into())
            }
            LayerSpec::LeakyRelu { slope } if !(slope > 0.0 && slope < 1.0) => {
                bad(format!("leaky_relu slope {slope} outside (0,1)"))
            }
            LayerSpec::Dropout { p } if !(0.0..1.0).contains(&p) => {
                bad(format!("dropout probability {p} outside [0,1)"))
            }
            LayerSpec::Reshape { ref shape } if shape.is_empty() || shape.contains(&0) => {
                bad("reshape target must be non-empty and positive".into())
            }
            _ => Ok(()),
        }
    }

    /// Per-sample output shape for a per-sample input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NetError> {
        self.validate()?;
        let mismatch = |expected: Vec<usize>| NetError::ShapeMismatch {
            context: self.kind().to_string(),
            expected,
            actual: input.to_vec(),
        };
        match *self {
            LayerSpec::Dense { inputs, outputs } => {
                if input != [inputs] {
                    return Err(mismatch(vec![inputs]));
                }
                Ok(vec![outputs])
            }
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            } => {
                let [c, h, w] = three(input).ok_or_else(|| mismatch(vec![in_channels, 0, 0]))?;
                if c != in_channels || h + 2 * padding < kernel || w + 2 * padding < kernel {
                    return Err(mismatch(vec![in_channels, h, w]));
                }
                Ok(vec![
                    out_channels,
                    (h + 2 * padding - kernel) / stride + 1,
                    (w + 2 * padding - kernel) / stride + 1,
                ])
            }
            LayerSpec::TransposedConv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            } => {
                let [c, h, w] = three(input).ok_or_else(|| mismatch(vec![in_channels, 0, 0]))?;
                if c != in_channels || h == 0 || w == 0 {
                    return Err(mismatch(vec![in_channels, h, w]));
                }
                let oh = (h - 1) * stride + kernel;
                let ow = (w - 1) * stride + kernel;
                if oh <= 2 * padding || ow <= 2 * padding {
                    return Err(mismatch(vec![in_channels, h, w]));
                }
                Ok(vec![out_channels, oh - 2 * padding, ow - 2 * padding])
            }
            LayerSpec::BatchNorm { features, .. } => {
                if input.is_empty()
                    || input[0] != features
                    || !(input.len() == 1 || input.len() == 3)
                {
                    return Err(mismatch(vec![features]));
                }
                Ok(input.to_vec())
            }
            LayerSpec::Reshape { ref shape } => {
                if shape.iter().product::<usize>() != input.iter().product::<usize>() {
                    return Err(mismatch(shape.clone()));
                }
                Ok(shape.clone())
            }
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
            LayerSpec::LeakyRelu { .. }
            | LayerSpec::Sigmoid
            | LayerSpec::Tanh
            | LayerSpec::Dropout { .. } => Ok(input.to_vec()),
        }
    }

    /// Trainable tensors owned by this layer, as `(suffix, shape)`.
    pub fn parameter_shapes(&self) -> Vec<(&'static str, Vec<usize>)> {
        match *self {
            LayerSpec::Dense { inputs, outputs } => {
                vec![("weight", vec![outputs, inputs]), ("bias", vec![outputs])]
            }
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => vec![
                ("weight", vec![out_channels, in_channels, kernel, kernel]),
                ("bias", vec![out_channels]),
            ],
            LayerSpec::TransposedConv2d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => vec![
                ("weight", vec![in_channels, out_channels, kernel, kernel]),
                ("bias", vec![out_channels]),
            ],
            LayerSpec::BatchNorm { features, .. } => {
                vec![("gamma", vec![features]), ("beta", vec![features])]
            }
            _ => Vec::new(),
        }
    }

    /// Non-trainable state (batch-norm running statistics).
    pub fn buffer_shapes(&self) -> Vec<(&'static str, Vec<usize>)> {
        match *self {
            LayerSpec::BatchNorm { features, .. } => vec![
                ("running_mean", vec![features]),
                ("running_var", vec![features]),
            ],
            _ => Vec::new(),
        }
    }
}

fn three(shape: &[usize]) -> Option<[usize; 3]> {
    match *shape {
        [c, h, w] => Some([c, h, w]),
        _ => None,
    }
}
