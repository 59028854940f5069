//! Analytic loss gradients, back-propagated through small networks, against
//! central finite differences. Each check returns the worst relative error
//! over its batches.
#![allow(dead_code)]

use ganbench::losses::{
    discriminator_bce_loss, generator_bce_loss, wasserstein_critic_loss,
    wasserstein_generator_loss, AdversarialBatchScores, LossOutput, ScoreMode,
};
use ganbench::nn::{Head, LayerSpec, NetworkSpec, ParameterStore};
use ganbench::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const BATCHES: usize = 100;
pub const TOL: f64 = 1e-4;
const STEP: f64 = 1e-5;
const DIM: usize = 4;
const LATENT: usize = 3;
const BATCH: usize = 5;

fn discriminator(head: Head) -> NetworkSpec {
    let mut layers = vec![
        LayerSpec::Dense {
            inputs: DIM,
            outputs: 5,
        },
        LayerSpec::LeakyRelu { slope: 0.2 },
        LayerSpec::Dense {
            inputs: 5,
            outputs: 1,
        },
    ];
    if head == Head::Sigmoid {
        layers.push(LayerSpec::Sigmoid);
    }
    NetworkSpec::new(layers, vec![DIM], head).unwrap()
}

fn generator() -> NetworkSpec {
    NetworkSpec::new(
        vec![
            LayerSpec::Dense {
                inputs: LATENT,
                outputs: DIM,
            },
            LayerSpec::Tanh,
        ],
        vec![LATENT],
        Head::Tanh,
    )
    .unwrap()
}

fn randomized(spec: &NetworkSpec, rng: &mut ChaCha8Rng) -> ParameterStore {
    let mut p = ParameterStore::zeros(spec);
    let vals: Vec<f64> = (0..p.parameter_count())
        .map(|_| 0.7 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    p.set_flat_values(&vals);
    p
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Tensor::from_vec(vec![rows, cols], data).unwrap()
}

fn scores(spec: &NetworkSpec, params: &ParameterStore, x: &Tensor) -> Vec<f64> {
    spec.forward(params, x).unwrap().into_data()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Gradient of a discriminator-side loss with respect to the discriminator's
/// parameters via two recorded passes and the loss's score gradients.
fn discriminator_grad(
    spec: &NetworkSpec,
    params: &ParameterStore,
    real: &Tensor,
    fake: &Tensor,
    loss: impl Fn(Vec<f64>, Vec<f64>) -> LossOutput,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut p = params.clone();
    let (sr, tape_r) = spec.forward_train(&mut p, real, &mut rng).unwrap();
    let (sf, tape_f) = spec.forward_train(&mut p, fake, &mut rng).unwrap();
    let out = loss(sr.into_data(), sf.into_data());
    let gr = Tensor::from_vec(vec![BATCH, 1], out.grad_real).unwrap();
    let gf = Tensor::from_vec(vec![BATCH, 1], out.grad_fake).unwrap();
    let (mut g, _) = spec.backward(&p, &tape_r, &gr).unwrap();
    let (g2, _) = spec.backward(&p, &tape_f, &gf).unwrap();
    g.accumulate(&g2);
    g.flat_values()
}

/// Gradient of a generator-side loss with respect to the generator's
/// parameters, chained through a fixed discriminator.
fn generator_grad(
    g_spec: &NetworkSpec,
    g_params: &ParameterStore,
    d_spec: &NetworkSpec,
    d_params: &ParameterStore,
    z: &Tensor,
    loss: impl Fn(Vec<f64>) -> LossOutput,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut gp = g_params.clone();
    let mut dp = d_params.clone();
    let (fake, g_tape) = g_spec.forward_train(&mut gp, z, &mut rng).unwrap();
    let (sf, d_tape) = d_spec.forward_train(&mut dp, &fake, &mut rng).unwrap();
    let out = loss(sf.into_data());
    let gf = Tensor::from_vec(vec![BATCH, 1], out.grad_fake).unwrap();
    let (_, dx) = d_spec.backward(&dp, &d_tape, &gf).unwrap();
    let (grads, _) = g_spec.backward(&gp, &g_tape, &dx).unwrap();
    grads.flat_values()
}

fn check_discriminator(
    head: Head,
    value: impl Fn(&[f64], &[f64]) -> f64,
    loss: impl Fn(Vec<f64>, Vec<f64>) -> LossOutput + Copy,
    seed: u64,
) -> f64 {
    let spec = discriminator(head);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..BATCHES {
        let params = randomized(&spec, &mut rng);
        assert!(params.parameter_count() <= 100);
        let real = gaussian(BATCH, DIM, &mut rng);
        let fake = gaussian(BATCH, DIM, &mut rng);
        let analytic = discriminator_grad(&spec, &params, &real, &fake, loss);
        let numeric = crate::oracles::finite_difference(&params.flat_values(), STEP, |theta| {
            let mut p = params.clone();
            p.set_flat_values(theta);
            value(&scores(&spec, &p, &real), &scores(&spec, &p, &fake))
        });
        worst = worst.max(crate::oracles::relative_error(&analytic, &numeric));
    }
    worst
}

fn check_generator(
    head: Head,
    value: impl Fn(&[f64]) -> f64,
    loss: impl Fn(Vec<f64>) -> LossOutput + Copy,
    seed: u64,
) -> f64 {
    let g_spec = generator();
    let d_spec = discriminator(head);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..BATCHES {
        let g_params = randomized(&g_spec, &mut rng);
        let d_params = randomized(&d_spec, &mut rng);
        assert!(g_params.parameter_count() + d_params.parameter_count() <= 100);
        let z = gaussian(BATCH, LATENT, &mut rng);
        let analytic = generator_grad(&g_spec, &g_params, &d_spec, &d_params, &z, loss);
        let numeric = crate::oracles::finite_difference(&g_params.flat_values(), STEP, |theta| {
            let mut p = g_params.clone();
            p.set_flat_values(theta);
            let fake = g_spec.forward(&p, &z).unwrap();
            value(&scores(&d_spec, &d_params, &fake))
        });
        worst = worst.max(crate::oracles::relative_error(&analytic, &numeric));
    }
    worst
}

fn probs(r: Vec<f64>, f: Vec<f64>) -> AdversarialBatchScores {
    AdversarialBatchScores::new(r, f, ScoreMode::Probability).unwrap()
}

pub fn discriminator_bce_gradient() -> f64 {
    check_discriminator(
        Head::Sigmoid,
        |r, f| {
            -mean(&r.iter().map(|p| p.ln()).collect::<Vec<_>>())
                - mean(&f.iter().map(|p| (1.0 - p).ln()).collect::<Vec<_>>())
        },
        |r, f| discriminator_bce_loss(&probs(r, f)).unwrap(),
        1,
    )
}

pub fn non_saturating_generator_gradient() -> f64 {
    check_generator(
        Head::Sigmoid,
        |f| -mean(&f.iter().map(|p| p.ln()).collect::<Vec<_>>()),
        |f| generator_bce_loss(&f, false).unwrap(),
        2,
    )
}

pub fn saturating_generator_gradient() -> f64 {
    check_generator(
        Head::Sigmoid,
        |f| mean(&f.iter().map(|p| (1.0 - p).ln()).collect::<Vec<_>>()),
        |f| generator_bce_loss(&f, true).unwrap(),
        3,
    )
}

pub fn wasserstein_critic_gradient() -> f64 {
    check_discriminator(
        Head::Linear,
        |r, f| mean(f) - mean(r),
        |r, f| {
            wasserstein_critic_loss(&AdversarialBatchScores::new(r, f, ScoreMode::Critic).unwrap())
                .unwrap()
        },
        4,
    )
}

pub fn wasserstein_generator_gradient() -> f64 {
    check_generator(
        Head::Linear,
        |f| -mean(f),
        |f| wasserstein_generator_loss(&f).unwrap(),
        5,
    )
}
