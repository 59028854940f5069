use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{LayerSpec, NetError, NetworkSpec};
use crate::tensor::Tensor;

/// Standard deviation of the normal initializer for dense and conv weights.
pub const INIT_STD: f64 = 0.02;

pub(crate) fn param_name(layer: usize, suffix: &str) -> String {
    format!("layer{layer:02}.{suffix}")
}

/// Named trainable tensors of one network plus its non-trainable buffers.
///
/// Names are `layerNN.<suffix>`; the map ordering therefore follows layer order,
/// which keeps iteration (and every reduction over it) deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore {
    tensors: BTreeMap<String, Tensor>,
    buffers: BTreeMap<String, Tensor>,
    init_seed: Option<u64>,
}

impl ParameterStore {
    /// Normal(0, 0.02) weights, zero biases, unit batch-norm scale.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let mut store = Self::zeros(spec);
        store.init_seed = Some(seed);
        for (name, t) in store.tensors.iter_mut() {
            if name.ends_with(".weight") {
                t.data_mut()
                    .iter_mut()
                    .for_each(|v| *v = normal.sample(&mut rng));
            } else if name.ends_with(".gamma") {
                t.data_mut().iter_mut().for_each(|v| *v = 1.0);
            }
        }
        store
    }

    /// Every trainable tensor zero; batch-norm running variance one.
    pub fn zeros(spec: &NetworkSpec) -> Self {
        let mut tensors = BTreeMap::new();
        let mut buffers = BTreeMap::new();
        for (i, layer) in spec.layers().iter().enumerate() {
            for (suffix, shape) in layer.parameter_shapes() {
                tensors.insert(param_name(i, suffix), Tensor::zeros(&shape));
            }
            for (suffix, shape) in layer.buffer_shapes() {
                let fill = if suffix == "running_var" { 1.0 } else { 0.0 };
                buffers.insert(param_name(i, suffix), Tensor::full(&shape, fill));
            }
        }
        Self {
            tensors,
            buffers,
            init_seed: None,
        }
    }

    pub fn from_parts(
        tensors: BTreeMap<String, Tensor>,
        buffers: BTreeMap<String, Tensor>,
        init_seed: Option<u64>,
    ) -> Self {
        Self {
            tensors,
            buffers,
            init_seed,
        }
    }

    pub fn init_seed(&self) -> Option<u64> {
        self.init_seed
    }

    /// Checks that names, shapes and finiteness agree with `spec`.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<(), NetError> {
        let expected = Self::zeros(spec);
        for (kind, have, want) in [
            ("parameter", &self.tensors, &expected.tensors),
            ("buffer", &self.buffers, &expected.buffers),
        ] {
            if have.len() != want.len() {
                return Err(NetError::InvalidParameters(format!(
                    "{kind} count {} != {}",
                    have.len(),
                    want.len()
                )));
            }
            for (name, w) in want {
                let h = have
                    .get(name)
                    .ok_or_else(|| NetError::MissingParameter(name.clone()))?;
                if h.shape() != w.shape() {
                    return Err(NetError::ShapeMismatch {
                        context: name.clone(),
                        expected: w.shape().to_vec(),
                        actual: h.shape().to_vec(),
                    });
                }
                if !h.all_finite() {
                    return Err(NetError::InvalidParameters(format!("{name} is not finite")));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor, NetError> {
        self.tensors
            .get(name)
            .ok_or_else(|| NetError::MissingParameter(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    pub(crate) fn layer_param(&self, layer: usize, suffix: &str) -> Result<&Tensor, NetError> {
        self.get(&param_name(layer, suffix))
    }

    pub(crate) fn layer_buffers_mut(
        &mut self,
        layer: usize,
    ) -> Result<(&mut Tensor, &mut Tensor), NetError> {
        let mean_name = param_name(layer, "running_mean");
        let var_name = param_name(layer, "running_var");
        // two disjoint entries of one map
        let mut mean = None;
        let mut var = None;
        for (name, t) in self.buffers.iter_mut() {
            if *name == mean_name {
                mean = Some(t);
            } else if *name == var_name {
                var = Some(t);
            }
        }
        match (mean, var) {
            (Some(m), Some(v)) => Ok((m, v)),
            _ => Err(NetError::MissingParameter(mean_name)),
        }
    }

    pub(crate) fn layer_buffer(&self, layer: usize, suffix: &str) -> Result<&Tensor, NetError> {
        let name = param_name(layer, suffix);
        self.buffers
            .get(&name)
            .ok_or(NetError::MissingParameter(name))
    }

    pub fn tensors(&self) -> &BTreeMap<String, Tensor> {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor)> {
        self.tensors.iter_mut()
    }

    pub fn buffers(&self) -> &BTreeMap<String, Tensor> {
        &self.buffers
    }

    /// Total number of trainable scalars.
    pub fn parameter_count(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    /// Largest absolute trainable value.
    pub fn max_abs(&self) -> f64 {
        self.tensors.values().fold(0.0, |m, t| m.max(t.max_abs()))
    }

    /// Flattened copy of every trainable value in name order.
    pub fn flat_values(&self) -> Vec<f64> {
        self.tensors
            .values()
            .flat_map(|t| t.data().iter().copied())
            .collect()
    }

    /// Overwrites trainable values from a flat vector in name order.
    pub fn set_flat_values(&mut self, values: &[f64]) {
        let mut offset = 0;
        for t in self.tensors.values_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        assert_eq!(offset, values.len(), "flat value count");
    }
}

/// Gradients keyed exactly like the trainable tensors of a [`ParameterStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    tensors: BTreeMap<String, Tensor>,
}

impl Gradients {
    pub fn zeros_like(params: &ParameterStore) -> Self {
        Self {
            tensors: params
                .tensors
                .iter()
                .map(|(k, t)| (k.clone(), Tensor::zeros(t.shape())))
                .collect(),
        }
    }

    pub fn from_map(tensors: BTreeMap<String, Tensor>) -> Self {
        Self { tensors }
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub(crate) fn layer_mut(&mut self, layer: usize, suffix: &str) -> &mut Tensor {
        self.tensors
            .get_mut(&param_name(layer, suffix))
            .expect("gradient slot exists for every parameter")
    }

    pub fn tensors(&self) -> &BTreeMap<String, Tensor> {
        &self.tensors
    }

    pub fn flat_values(&self) -> Vec<f64> {
        self.tensors
            .values()
            .flat_map(|t| t.data().iter().copied())
            .collect()
    }

    /// Adds `other` into `self`.
    pub fn accumulate(&mut self, other: &Gradients) {
        for (name, t) in self.tensors.iter_mut() {
            if let Some(o) = other.tensors.get(name) {
                for (a, b) in t.data_mut().iter_mut().zip(o.data()) {
                    *a += b;
                }
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.values().all(Tensor::all_finite)
    }
}

/// Counts layers of a kind; used by structural checks and tests.
pub fn count_layers(spec: &NetworkSpec, pred: impl Fn(&LayerSpec) -> bool) -> usize {
    spec.layers().iter().filter(|l| pred(l)).count()
}
