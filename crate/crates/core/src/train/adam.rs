use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::nn::{Gradients, ParameterStore};
use crate::tensor::Tensor;

/// Step size and moment decay rates of one Adam optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

/// First and second moment estimates per parameter, plus the step count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: BTreeMap<String, Tensor>,
    pub v: BTreeMap<String, Tensor>,
}

impl AdamState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// One bias-corrected Adam step applied to `params` in place.
pub fn adam_update(
    params: &mut ParameterStore,
    grads: &Gradients,
    state: &mut AdamState,
    hp: &AdamParams,
) -> Result<(), TrainError> {
    if !(hp.lr > 0.0) {
        return Err(TrainError::InvalidHyperparameters(format!(
            "learning rate {} must be positive",
            hp.lr
        )));
    }
    for (name, p) in params.tensors() {
        match grads.get(name) {
            Some(g) if g.shape() == p.shape() => {}
            other => {
                return Err(TrainError::ShapeMismatch {
                    name: name.clone(),
                    expected: p.shape().to_vec(),
                    actual: other.map(|g| g.shape().to_vec()).unwrap_or_default(),
                })
            }
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - hp.beta1.powi(t);
    let bc2 = 1.0 - hp.beta2.powi(t);
    for (name, p) in params.tensors_mut() {
        let g = grads.get(name).expect("checked above");
        let m = state
            .m
            .entry(name.clone())
            .or_insert_with(|| Tensor::zeros(p.shape()));
        let v = state
            .v
            .entry(name.clone())
            .or_insert_with(|| Tensor::zeros(p.shape()));
        let (pd, gd) = (p.data_mut(), g.data());
        let (md, vd) = (m.data_mut(), v.data_mut());
        for i in 0..pd.len() {
            md[i] = hp.beta1 * md[i] + (1.0 - hp.beta1) * gd[i];
            vd[i] = hp.beta2 * vd[i] + (1.0 - hp.beta2) * gd[i] * gd[i];
            let m_hat = md[i] / bc1;
            let v_hat = vd[i] / bc2;
            pd[i] -= hp.lr * m_hat / (v_hat.sqrt() + hp.eps);
        }
    }
    Ok(())
}
