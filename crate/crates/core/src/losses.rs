//! Adversarial objectives over batches of discriminator / critic scores.
//!
//! Every loss returns its value together with the exact gradient with respect
//! to the scores it consumed, so training can back-propagate through the
//! networks that produced them. Logarithms are natural.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs.
pub const EPS: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("loss expects {expected:?} scores, got {actual:?}")]
    ModeMismatch {
        expected: ScoreMode,
        actual: ScoreMode,
    },
    #[error("batch sizes differ: {0} real vs {1} fake")]
    SizeMismatch(usize, usize),
    #[error("empty batch")]
    EmptyBatch,
}

/// What the scores mean: sigmoid probabilities or unbounded critic values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    Probability,
    Critic,
}

/// Scores of one batch of real and one batch of generated samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialBatchScores {
    pub d_real: Vec<f64>,
    pub d_fake: Vec<f64>,
    pub mode: ScoreMode,
}

impl AdversarialBatchScores {
    pub fn new(d_real: Vec<f64>, d_fake: Vec<f64>, mode: ScoreMode) -> Result<Self, LossError> {
        if d_real.len() != d_fake.len() {
            return Err(LossError::SizeMismatch(d_real.len(), d_fake.len()));
        }
        if d_real.is_empty() {
            return Err(LossError::EmptyBatch);
        }
        Ok(Self {
            d_real,
            d_fake,
            mode,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.d_real.len()
    }

    fn require(&self, expected: ScoreMode) -> Result<(), LossError> {
        if self.mode != expected {
            return Err(LossError::ModeMismatch {
                expected,
                actual: self.mode,
            });
        }
        if expected == ScoreMode::Probability {
            check_probabilities(&self.d_real)?;
            check_probabilities(&self.d_fake)?;
        }
        Ok(())
    }
}

/// A scalar loss and its gradient with respect to each score.
#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub value: f64,
    pub grad_real: Vec<f64>,
    pub grad_fake: Vec<f64>,
    /// Scores that had to be clamped into `[EPS, 1 - EPS]`.
    pub clamp_events: usize,
}

fn check_probabilities(scores: &[f64]) -> Result<(), LossError> {
    // Anything outside [0, 1] cannot be a sigmoid output.
    if scores.iter().all(|p| (0.0..=1.0).contains(p)) {
        Ok(())
    } else {
        Err(LossError::ModeMismatch {
            expected: ScoreMode::Probability,
            actual: ScoreMode::Critic,
        })
    }
}

/// Clamped probability and whether the clamp was active (zero derivative).
fn clamp(p: f64) -> (f64, bool) {
    let c = p.clamp(EPS, 1.0 - EPS);
    (c, c != p)
}

/// `L_D = −mean(log D(x)) − mean(log(1 − D(G(z))))`.
pub fn discriminator_bce_loss(scores: &AdversarialBatchScores) -> Result<LossOutput, LossError> {
    scores.require(ScoreMode::Probability)?;
    let m = scores.batch_size() as f64;
    let mut value = 0.0;
    let mut clamp_events = 0;
    let grad_real = scores
        .d_real
        .iter()
        .map(|&p| {
            let (c, clamped) = clamp(p);
            value -= c.ln() / m;
            clamp_events += clamped as usize;
            if clamped {
                0.0
            } else {
                -1.0 / (m * c)
            }
        })
        .collect();
    let grad_fake = scores
        .d_fake
        .iter()
        .map(|&p| {
            let (c, clamped) = clamp(p);
            value -= (1.0 - c).ln() / m;
            clamp_events += clamped as usize;
            if clamped {
                0.0
            } else {
                1.0 / (m * (1.0 - c))
            }
        })
        .collect();
    Ok(LossOutput {
        value,
        grad_real,
        grad_fake,
        clamp_events,
    })
}

/// Generator side of the minimax objective.
///
/// Saturating: `mean(log(1 − D(G(z))))`, the literal generator term, minimized.
/// Non-saturating (default in training): `−mean(log D(G(z)))`.
pub fn generator_bce_loss(d_fake: &[f64], saturating: bool) -> Result<LossOutput, LossError> {
    if d_fake.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    check_probabilities(d_fake)?;
    let m = d_fake.len() as f64;
    let mut value = 0.0;
    let mut clamp_events = 0;
    let grad_fake = d_fake
        .iter()
        .map(|&p| {
            let (c, clamped) = clamp(p);
            clamp_events += clamped as usize;
            if saturating {
                value += (1.0 - c).ln() / m;
                if clamped {
                    0.0
                } else {
                    -1.0 / (m * (1.0 - c))
                }
            } else {
                value -= c.ln() / m;
                if clamped {
                    0.0
                } else {
                    -1.0 / (m * c)
                }
            }
        })
        .collect();
    Ok(LossOutput {
        value,
        grad_real: Vec::new(),
        grad_fake,
        clamp_events,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `mean(C(G(z))) − mean(C(x))`; its negation estimates `W(P_r, P_g)`.
pub fn wasserstein_critic_loss(scores: &AdversarialBatchScores) -> Result<LossOutput, LossError> {
    scores.require(ScoreMode::Critic)?;
    let m = scores.batch_size() as f64;
    Ok(LossOutput {
        value: mean(&scores.d_fake) - mean(&scores.d_real),
        grad_real: vec![-1.0 / m; scores.d_real.len()],
        grad_fake: vec![1.0 / m; scores.d_fake.len()],
        clamp_events: 0,
    })
}

/// `−mean(C(G(z)))`.
pub fn wasserstein_generator_loss(c_fake: &[f64]) -> Result<LossOutput, LossError> {
    if c_fake.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    let m = c_fake.len() as f64;
    Ok(LossOutput {
        value: -mean(c_fake),
        grad_real: Vec::new(),
        grad_fake: vec![-1.0 / m; c_fake.len()],
        clamp_events: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    CriticDual,
    Exact1dOracle,
}

/// An estimate of the Wasserstein-1 distance between two sample sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WassersteinEstimate {
    pub value: f64,
    pub source: EstimateSource,
}

/// The critic's batch estimate, `−(mean(C(G(z))) − mean(C(x)))`.
pub fn critic_estimate(scores: &AdversarialBatchScores) -> Result<WassersteinEstimate, LossError> {
    Ok(WassersteinEstimate {
        value: -wasserstein_critic_loss(scores)?.value,
        source: EstimateSource::CriticDual,
    })
}

/// Exact W1 between two equal-size 1-D empirical distributions: the optimal
/// transport plan matches order statistics.
pub fn exact_w1_empirical_1d(a: &[f64], b: &[f64]) -> Result<WassersteinEstimate, LossError> {
    if a.len() != b.len() {
        return Err(LossError::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let total: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum();
    Ok(WassersteinEstimate {
        value: total / a.len() as f64,
        source: EstimateSource::Exact1dOracle,
    })
}
