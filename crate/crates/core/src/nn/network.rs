use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layer::LayerSpec;
use super::ops::{col2im, gemm, im2col, Mat, Window};
use super::params::{Gradients, ParameterStore};
use super::NetError;
use crate::tensor::Tensor;

/// Final activation of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    Sigmoid,
    Linear,
    Tanh,
}

/// Forward-pass behaviour of dropout and batch normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active, batch statistics used and running statistics updated.
    Train,
    /// Dropout disabled, frozen running statistics.
    Eval,
}

/// An immutable, shape-checked layer graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    layers: Vec<LayerSpec>,
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    head: Head,
}

impl NetworkSpec {
    /// Validates layer compatibility and that the last layer realizes `head`.
    pub fn new(
        layers: Vec<LayerSpec>,
        input_shape: Vec<usize>,
        head: Head,
    ) -> Result<Self, NetError> {
        let mut shape = input_shape.clone();
        for layer in &layers {
            shape = layer.output_shape(&shape)?;
        }
        let last = layers
            .last()
            .ok_or(NetError::InvalidLayer("empty network".into()))?;
        let head_ok = match head {
            Head::Sigmoid => matches!(last, LayerSpec::Sigmoid),
            Head::Tanh => matches!(last, LayerSpec::Tanh),
            Head::Linear => !matches!(
                last,
                LayerSpec::Sigmoid | LayerSpec::Tanh | LayerSpec::LeakyRelu { .. }
            ),
        };
        if !head_ok {
            return Err(NetError::InvalidLayer(format!(
                "head {head:?} does not match final layer {}",
                last.kind()
            )));
        }
        Ok(Self {
            layers,
            input_shape,
            output_shape: shape,
            head,
        })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn head(&self) -> Head {
        self.head
    }

    fn check_batch(&self, batch: &Tensor) -> Result<(), NetError> {
        if batch.sample_shape() != self.input_shape.as_slice() || batch.batch_size() == 0 {
            return Err(NetError::ShapeMismatch {
                context: "network input".into(),
                expected: self.input_shape.clone(),
                actual: batch.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Evaluation-mode forward pass (no dropout, frozen statistics).
    pub fn forward(&self, params: &ParameterStore, batch: &Tensor) -> Result<Tensor, NetError> {
        self.check_batch(batch)?;
        let mut x = batch.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            x = eval_layer(i, layer, params, x)?;
        }
        Ok(x)
    }

    /// Training-mode forward pass recording what [`Self::backward`] needs.
    pub fn forward_train<R: Rng + ?Sized>(
        &self,
        params: &mut ParameterStore,
        batch: &Tensor,
        rng: &mut R,
    ) -> Result<(Tensor, Tape), NetError> {
        self.check_batch(batch)?;
        let mut x = batch.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let (y, cache) = train_layer(i, layer, params, x, rng)?;
            caches.push(cache);
            x = y;
        }
        Ok((x, Tape { caches }))
    }

    /// Back-propagates `grad_output` through a recorded forward pass, returning
    /// parameter gradients and the gradient with respect to the network input.
    pub fn backward(
        &self,
        params: &ParameterStore,
        tape: &Tape,
        grad_output: &Tensor,
    ) -> Result<(Gradients, Tensor), NetError> {
        if tape.caches.len() != self.layers.len() {
            return Err(NetError::InvalidLayer(
                "tape does not belong to this network".into(),
            ));
        }
        let mut grads = Gradients::zeros_like(params);
        let mut g = grad_output.clone();
        for (i, (layer, cache)) in self.layers.iter().zip(&tape.caches).enumerate().rev() {
            g = backward_layer(i, layer, params, cache, g, &mut grads)?;
        }
        Ok((grads, g))
    }
}

/// Per-layer state saved by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    caches: Vec<Cache>,
}

#[derive(Debug, Clone)]
enum Cache {
    Input(Tensor),
    Output(Tensor),
    Mask(Vec<f64>),
    Norm { xhat: Tensor, inv_std: Vec<f64> },
    Shape(Vec<usize>),
}

fn with_batch(n: usize, sample: &[usize]) -> Vec<usize> {
    let mut s = vec![n];
    s.extend_from_slice(sample);
    s
}

fn eval_layer(
    i: usize,
    layer: &LayerSpec,
    params: &ParameterStore,
    x: Tensor,
) -> Result<Tensor, NetError> {
    match *layer {
        LayerSpec::BatchNorm { features, eps, .. } => {
            let mean = params.layer_buffer(i, "running_mean")?.data().to_vec();
            let var = params.layer_buffer(i, "running_var")?.data();
            let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
            let (_, y) = normalize(i, params, &x, features, &mean, &inv_std)?;
            Ok(y)
        }
        LayerSpec::Dropout { .. } => Ok(x),
        _ => stateless_forward(i, layer, params, x),
    }
}

fn train_layer<R: Rng + ?Sized>(
    i: usize,
    layer: &LayerSpec,
    params: &mut ParameterStore,
    x: Tensor,
    rng: &mut R,
) -> Result<(Tensor, Cache), NetError> {
    match *layer {
        LayerSpec::Dense { .. } | LayerSpec::Conv2d { .. } | LayerSpec::TransposedConv2d { .. } => {
            let y = stateless_forward(i, layer, params, x.clone())?;
            Ok((y, Cache::Input(x)))
        }
        LayerSpec::LeakyRelu { .. } => {
            let y = stateless_forward(i, layer, params, x.clone())?;
            Ok((y, Cache::Input(x)))
        }
        LayerSpec::Sigmoid | LayerSpec::Tanh => {
            let y = stateless_forward(i, layer, params, x)?;
            Ok((y.clone(), Cache::Output(y)))
        }
        LayerSpec::Reshape { .. } | LayerSpec::Flatten => {
            let shape = x.shape().to_vec();
            let y = stateless_forward(i, layer, params, x)?;
            Ok((y, Cache::Shape(shape)))
        }
        LayerSpec::Dropout { p } => {
            let keep = 1.0 - p;
            let mask: Vec<f64> = (0..x.len())
                .map(|_| {
                    if rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut y = x;
            y.data_mut()
                .iter_mut()
                .zip(&mask)
                .for_each(|(v, m)| *v *= m);
            Ok((y, Cache::Mask(mask)))
        }
        LayerSpec::BatchNorm {
            features,
            momentum,
            eps,
        } => {
            let (count, mean, var) = channel_stats(&x, features);
            let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
            let (xhat, y) = normalize(i, params, &x, features, &mean, &inv_std)?;
            let unbias = if count > 1 {
                count as f64 / (count as f64 - 1.0)
            } else {
                1.0
            };
            let (rm, rv) = params.layer_buffers_mut(i)?;
            for c in 0..features {
                let m = &mut rm.data_mut()[c];
                *m = (1.0 - momentum) * *m + momentum * mean[c];
                let v = &mut rv.data_mut()[c];
                *v = (1.0 - momentum) * *v + momentum * var[c] * unbias;
            }
            Ok((y, Cache::Norm { xhat, inv_std }))
        }
    }
}

/// `(elements per channel, mean, biased variance)` over batch and space.
fn channel_stats(x: &Tensor, features: usize) -> (usize, Vec<f64>, Vec<f64>) {
    let n = x.batch_size();
    let spatial = x.sample_len() / features;
    let count = n * spatial;
    let mut mean = vec![0.0; features];
    let mut var = vec![0.0; features];
    for s in 0..n {
        let sample = x.sample(s);
        for c in 0..features {
            mean[c] += sample[c * spatial..(c + 1) * spatial].iter().sum::<f64>();
        }
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    for s in 0..n {
        let sample = x.sample(s);
        for c in 0..features {
            var[c] += sample[c * spatial..(c + 1) * spatial]
                .iter()
                .map(|v| (v - mean[c]).powi(2))
                .sum::<f64>();
        }
    }
    var.iter_mut().for_each(|v| *v /= count as f64);
    (count, mean, var)
}

fn normalize(
    i: usize,
    params: &ParameterStore,
    x: &Tensor,
    features: usize,
    mean: &[f64],
    inv_std: &[f64],
) -> Result<(Tensor, Tensor), NetError> {
    let gamma = params.layer_param(i, "gamma")?.data();
    let beta = params.layer_param(i, "beta")?.data();
    let spatial = x.sample_len() / features;
    let mut xhat = x.clone();
    let mut y = x.clone();
    for (idx, (h, out)) in xhat
        .data_mut()
        .iter_mut()
        .zip(y.data_mut().iter_mut())
        .enumerate()
    {
        let c = (idx / spatial) % features;
        *h = (*h - mean[c]) * inv_std[c];
        *out = gamma[c] * *h + beta[c];
    }
    Ok((xhat, y))
}

fn stateless_forward(
    i: usize,
    layer: &LayerSpec,
    params: &ParameterStore,
    x: Tensor,
) -> Result<Tensor, NetError> {
    let n = x.batch_size();
    let out_sample = layer.output_shape(x.sample_shape())?;
    match *layer {
        LayerSpec::Dense { inputs, outputs } => {
            let w = params.layer_param(i, "weight")?.data();
            let b = params.layer_param(i, "bias")?.data();
            let mut out = vec![0.0; n * outputs];
            for row in out.chunks_mut(outputs) {
                row.copy_from_slice(b);
            }
            gemm(
                Mat::new(x.data(), n, inputs),
                Mat::new(w, outputs, inputs).t(),
                1.0,
                &mut out,
            );
            Ok(Tensor::from_vec(vec![n, outputs], out)?)
        }
        LayerSpec::Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
        } => {
            let (h, w_) = (x.shape()[2], x.shape()[3]);
            let g = Window {
                channels: in_channels,
                height: h,
                width: w_,
                kernel,
                stride,
                padding,
            };
            let w = params.layer_param(i, "weight")?.data();
            let b = params.layer_param(i, "bias")?.data();
            let spatial = g.col_cols();
            let mut cols = vec![0.0; g.col_rows() * spatial];
            let mut out = vec![0.0; n * out_channels * spatial];
            for (s, dst) in out.chunks_mut(out_channels * spatial).enumerate() {
                im2col(x.sample(s), g, &mut cols);
                for (c, plane) in dst.chunks_mut(spatial).enumerate() {
                    plane.iter_mut().for_each(|v| *v = b[c]);
                }
                gemm(
                    Mat::new(w, out_channels, g.col_rows()),
                    Mat::new(&cols, g.col_rows(), spatial),
                    1.0,
                    dst,
                );
            }
            Ok(Tensor::from_vec(with_batch(n, &out_sample), out)?)
        }
        LayerSpec::TransposedConv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
        } => {
            let (h, w_) = (x.shape()[2], x.shape()[3]);
            let (oh, ow) = (out_sample[1], out_sample[2]);
            // the output plays the role of a conv input whose patch grid is h x w
            let g = Window {
                channels: out_channels,
                height: oh,
                width: ow,
                kernel,
                stride,
                padding,
            };
            debug_assert_eq!((g.out_height(), g.out_width()), (h, w_));
            let w = params.layer_param(i, "weight")?.data();
            let b = params.layer_param(i, "bias")?.data();
            let mut cols = vec![0.0; g.col_rows() * h * w_];
            let plane = oh * ow;
            let mut out = vec![0.0; n * out_channels * plane];
            for (s, dst) in out.chunks_mut(out_channels * plane).enumerate() {
                gemm(
                    Mat::new(w, in_channels, g.col_rows()).t(),
                    Mat::new(x.sample(s), in_channels, h * w_),
                    0.0,
                    &mut cols,
                );
                for (c, p) in dst.chunks_mut(plane).enumerate() {
                    p.iter_mut().for_each(|v| *v = b[c]);
                }
                col2im(&cols, g, dst);
            }
            Ok(Tensor::from_vec(with_batch(n, &out_sample), out)?)
        }
        LayerSpec::LeakyRelu { slope } => Ok(x.map(|v| if v > 0.0 { v } else { slope * v })),
        LayerSpec::Sigmoid => Ok(x.map(sigmoid)),
        LayerSpec::Tanh => Ok(x.map(f64::tanh)),
        LayerSpec::Reshape { .. } | LayerSpec::Flatten => {
            Ok(x.reshape(with_batch(n, &out_sample))?)
        }
        LayerSpec::Dropout { .. } | LayerSpec::BatchNorm { .. } => {
            unreachable!("stateful layers are handled by the caller")
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn backward_layer(
    i: usize,
    layer: &LayerSpec,
    params: &ParameterStore,
    cache: &Cache,
    g: Tensor,
    grads: &mut Gradients,
) -> Result<Tensor, NetError> {
    let n = g.batch_size();
    match (layer, cache) {
        (&LayerSpec::Dense { inputs, outputs }, Cache::Input(x)) => {
            let w = params.layer_param(i, "weight")?.data();
            gemm(
                Mat::new(g.data(), n, outputs).t(),
                Mat::new(x.data(), n, inputs),
                1.0,
                grads.layer_mut(i, "weight").data_mut(),
            );
            let db = grads.layer_mut(i, "bias").data_mut();
            for row in g.data().chunks(outputs) {
                db.iter_mut().zip(row).for_each(|(a, b)| *a += b);
            }
            let mut dx = vec![0.0; n * inputs];
            gemm(
                Mat::new(g.data(), n, outputs),
                Mat::new(w, outputs, inputs),
                0.0,
                &mut dx,
            );
            Ok(Tensor::from_vec(x.shape().to_vec(), dx)?)
        }
        (
            &LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            },
            Cache::Input(x),
        ) => {
            let geom = Window {
                channels: in_channels,
                height: x.shape()[2],
                width: x.shape()[3],
                kernel,
                stride,
                padding,
            };
            let w = params.layer_param(i, "weight")?.data();
            let spatial = geom.col_cols();
            let rows = geom.col_rows();
            let mut cols = vec![0.0; rows * spatial];
            let mut dcols = vec![0.0; rows * spatial];
            let mut dx = Tensor::zeros(x.shape());
            let in_len = x.sample_len();
            let mut dw = std::mem::replace(grads.layer_mut(i, "weight"), Tensor::zeros(&[0]));
            for s in 0..n {
                let go = g.sample(s);
                im2col(x.sample(s), geom, &mut cols);
                gemm(
                    Mat::new(go, out_channels, spatial),
                    Mat::new(&cols, rows, spatial).t(),
                    1.0,
                    dw.data_mut(),
                );
                let db = grads.layer_mut(i, "bias").data_mut();
                for (c, plane) in go.chunks(spatial).enumerate() {
                    db[c] += plane.iter().sum::<f64>();
                }
                gemm(
                    Mat::new(w, out_channels, rows).t(),
                    Mat::new(go, out_channels, spatial),
                    0.0,
                    &mut dcols,
                );
                col2im(
                    &dcols,
                    geom,
                    &mut dx.data_mut()[s * in_len..(s + 1) * in_len],
                );
            }
            *grads.layer_mut(i, "weight") = dw;
            Ok(dx)
        }
        (
            &LayerSpec::TransposedConv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            },
            Cache::Input(x),
        ) => {
            let (h, w_) = (x.shape()[2], x.shape()[3]);
            let geom = Window {
                channels: out_channels,
                height: g.shape()[2],
                width: g.shape()[3],
                kernel,
                stride,
                padding,
            };
            let w = params.layer_param(i, "weight")?.data();
            let rows = geom.col_rows();
            let mut dcols = vec![0.0; rows * h * w_];
            let mut dx = Tensor::zeros(x.shape());
            let in_len = x.sample_len();
            let plane = geom.height * geom.width;
            let mut dw = std::mem::replace(grads.layer_mut(i, "weight"), Tensor::zeros(&[0]));
            for s in 0..n {
                let go = g.sample(s);
                let db = grads.layer_mut(i, "bias").data_mut();
                for (c, p) in go.chunks(plane).enumerate() {
                    db[c] += p.iter().sum::<f64>();
                }
                im2col(go, geom, &mut dcols);
                gemm(
                    Mat::new(w, in_channels, rows),
                    Mat::new(&dcols, rows, h * w_),
                    0.0,
                    &mut dx.data_mut()[s * in_len..(s + 1) * in_len],
                );
                gemm(
                    Mat::new(x.sample(s), in_channels, h * w_),
                    Mat::new(&dcols, rows, h * w_).t(),
                    1.0,
                    dw.data_mut(),
                );
            }
            *grads.layer_mut(i, "weight") = dw;
            Ok(dx)
        }
        (&LayerSpec::LeakyRelu { slope }, Cache::Input(x)) => {
            let mut dx = g;
            dx.data_mut().iter_mut().zip(x.data()).for_each(|(d, &v)| {
                if v <= 0.0 {
                    *d *= slope
                }
            });
            Ok(dx)
        }
        (LayerSpec::Sigmoid, Cache::Output(y)) => {
            let mut dx = g;
            dx.data_mut()
                .iter_mut()
                .zip(y.data())
                .for_each(|(d, &v)| *d *= v * (1.0 - v));
            Ok(dx)
        }
        (LayerSpec::Tanh, Cache::Output(y)) => {
            let mut dx = g;
            dx.data_mut()
                .iter_mut()
                .zip(y.data())
                .for_each(|(d, &v)| *d *= 1.0 - v * v);
            Ok(dx)
        }
        (LayerSpec::Dropout { .. }, Cache::Mask(mask)) => {
            let mut dx = g;
            dx.data_mut()
                .iter_mut()
                .zip(mask)
                .for_each(|(d, m)| *d *= m);
            Ok(dx)
        }
        (LayerSpec::Reshape { .. } | LayerSpec::Flatten, Cache::Shape(shape)) => {
            Ok(g.reshape(shape.clone())?)
        }
        (&LayerSpec::BatchNorm { features, .. }, Cache::Norm { xhat, inv_std }) => {
            let gamma = params.layer_param(i, "gamma")?.data().to_vec();
            let spatial = g.sample_len() / features;
            let count = (n * spatial) as f64;
            let mut sum_dy = vec![0.0; features];
            let mut sum_dy_xhat = vec![0.0; features];
            for (idx, (&dy, &xh)) in g.data().iter().zip(xhat.data()).enumerate() {
                let c = (idx / spatial) % features;
                sum_dy[c] += dy;
                sum_dy_xhat[c] += dy * xh;
            }
            {
                let dgamma = grads.layer_mut(i, "gamma").data_mut();
                dgamma
                    .iter_mut()
                    .zip(&sum_dy_xhat)
                    .for_each(|(a, b)| *a += b);
            }
            {
                let dbeta = grads.layer_mut(i, "beta").data_mut();
                dbeta.iter_mut().zip(&sum_dy).for_each(|(a, b)| *a += b);
            }
            let mut dx = g;
            for (idx, (d, &xh)) in dx.data_mut().iter_mut().zip(xhat.data()).enumerate() {
                let c = (idx / spatial) % features;
                *d = gamma[c] * inv_std[c] / count * (count * *d - sum_dy[c] - xh * sum_dy_xhat[c]);
            }
            Ok(dx)
        }
        _ => Err(NetError::InvalidLayer(format!(
            "tape entry does not match layer {} ({})",
            i,
            layer.kind()
        ))),
    }
}
