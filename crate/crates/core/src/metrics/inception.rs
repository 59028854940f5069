use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ImageView, MetricError};
use crate::data::bilinear_resize;
use crate::nn::{Archive, Head, NetworkSpec, ParameterStore};
use crate::tensor::Tensor;

pub const DEFAULT_SPLITS: usize = 10;

/// Anything that maps grayscale images in `[0, 1]` to class probabilities.
pub trait ClassifierBackend: Send + Sync {
    fn num_classes(&self) -> usize;

    /// Human-readable identity recorded next to every score.
    fn descriptor(&self) -> String;

    /// One probability row of length [`Self::num_classes`] per image.
    fn predict(&self, images: &[ImageView]) -> Result<Vec<Vec<f64>>, MetricError>;

    /// Whether concurrent `predict` calls are allowed.
    fn reentrant(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InceptionScore {
    pub mean: f64,
    pub std: f64,
}

const ROW_TOLERANCE: f64 = 1e-6;

/// `exp(E_x[KL(p(y|x) ‖ p(y))])` per split, then mean and population std
/// across splits.
pub fn inception_score_from_probabilities(
    rows: &[Vec<f64>],
    n_splits: usize,
) -> Result<InceptionScore, MetricError> {
    if n_splits == 0 {
        return Err(MetricError::InvalidParameter(
            "n_splits must be at least 1".into(),
        ));
    }
    if rows.len() < n_splits {
        return Err(MetricError::TooFewImages {
            needed: n_splits,
            got: rows.len(),
        });
    }
    let k = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        let valid = row.len() == k
            && k >= 2
            && row.iter().all(|p| p.is_finite() && *p >= 0.0)
            && (sum - 1.0).abs() <= ROW_TOLERANCE;
        if !valid {
            return Err(MetricError::DegenerateClassifier { row: i, sum });
        }
    }
    let n = rows.len();
    let scores: Vec<f64> = (0..n_splits)
        .map(|s| {
            let part = &rows[s * n / n_splits..(s + 1) * n / n_splits];
            let m = part.len() as f64;
            let marginal: Vec<f64> = (0..k)
                .map(|j| part.iter().map(|r| r[j]).sum::<f64>() / m)
                .collect();
            let mean_kl = part
                .iter()
                .map(|r| {
                    r.iter()
                        .zip(&marginal)
                        .filter(|(p, _)| **p > 0.0)
                        .map(|(p, q)| p * (p / q).ln())
                        .sum::<f64>()
                })
                .sum::<f64>()
                / m;
            mean_kl.exp()
        })
        .collect();
    let (mean, std) = super::mean_std(&scores);
    Ok(InceptionScore { mean, std })
}

pub fn inception_score(
    images: &[ImageView],
    classifier: &dyn ClassifierBackend,
    n_splits: usize,
) -> Result<InceptionScore, MetricError> {
    if images.len() < n_splits.max(1) {
        return Err(MetricError::TooFewImages {
            needed: n_splits.max(1),
            got: images.len(),
        });
    }
    let rows = classifier.predict(images)?;
    if rows.len() != images.len() {
        return Err(MetricError::Backend(format!(
            "{} returned {} rows for {} images",
            classifier.descriptor(),
            rows.len(),
            images.len()
        )));
    }
    inception_score_from_probabilities(&rows, n_splits)
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Replicates a grayscale image to `channels` planes at `side × side`.
fn to_input(image: &ImageView, channels: usize, height: usize, width: usize) -> Vec<f64> {
    let plane = if (image.height, image.width) == (height, width) {
        image.pixels.to_vec()
    } else {
        bilinear_resize(image.pixels, image.height, image.width, height, width)
    };
    plane.repeat(channels)
}

/// Returns scripted rows: image `i` of every call gets row `i % rows.len()`.
#[derive(Debug, Clone)]
pub struct ScriptedClassifier {
    rows: Vec<Vec<f64>>,
}

impl ScriptedClassifier {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        assert!(
            !rows.is_empty(),
            "scripted classifier needs at least one row"
        );
        Self { rows }
    }
}

impl ClassifierBackend for ScriptedClassifier {
    fn num_classes(&self) -> usize {
        self.rows[0].len()
    }

    fn descriptor(&self) -> String {
        format!("scripted({} rows)", self.rows.len())
    }

    fn predict(&self, images: &[ImageView]) -> Result<Vec<Vec<f64>>, MetricError> {
        Ok((0..images.len())
            .map(|i| self.rows[i % self.rows.len()].clone())
            .collect())
    }

    fn reentrant(&self) -> bool {
        true
    }
}

/// A fixed random linear map followed by softmax.
///
/// Not a trained recognizer: it only gives a deterministic, input-sensitive
/// class distribution when no pretrained network is configured, so scores
/// from it are comparable only with each other.
#[derive(Debug, Clone)]
pub struct ProjectionClassifier {
    classes: usize,
    side: usize,
    seed: u64,
    gain: f64,
    weights: Vec<f64>,
}

impl ProjectionClassifier {
    pub const CHANNELS: usize = 3;

    pub fn new(classes: usize, side: usize, seed: u64, gain: f64) -> Self {
        let d = Self::CHANNELS * side * side;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = gain / (d as f64).sqrt();
        let weights = (0..classes * d)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
            .collect();
        Self {
            classes,
            side,
            seed,
            gain,
            weights,
        }
    }
}

impl Default for ProjectionClassifier {
    fn default() -> Self {
        Self::new(10, 16, 0, 8.0)
    }
}

impl ClassifierBackend for ProjectionClassifier {
    fn num_classes(&self) -> usize {
        self.classes
    }

    fn descriptor(&self) -> String {
        format!(
            "random-projection(classes={}, side={}, seed={}, gain={})",
            self.classes, self.side, self.seed, self.gain
        )
    }

    fn predict(&self, images: &[ImageView]) -> Result<Vec<Vec<f64>>, MetricError> {
        let d = Self::CHANNELS * self.side * self.side;
        Ok(images
            .iter()
            .map(|img| {
                let x: Vec<f64> = to_input(img, Self::CHANNELS, self.side, self.side)
                    .into_iter()
                    .map(|p| p - 0.5)
                    .collect();
                let logits: Vec<f64> = self
                    .weights
                    .chunks_exact(d)
                    .map(|w| w.iter().zip(&x).map(|(a, b)| a * b).sum())
                    .collect();
                softmax(&logits)
            })
            .collect())
    }

    fn reentrant(&self) -> bool {
        true
    }
}

/// A classification network loaded from a weights archive; softmax is
/// applied to its linear head.
#[derive(Debug, Clone)]
pub struct NetworkClassifier {
    spec: NetworkSpec,
    params: ParameterStore,
    descriptor: String,
}

impl NetworkClassifier {
    pub fn new(
        spec: NetworkSpec,
        params: ParameterStore,
        descriptor: impl Into<String>,
    ) -> Result<Self, MetricError> {
        let bad = |m: String| MetricError::Backend(m);
        if spec.head() != Head::Linear {
            return Err(bad("classifier network must end in a linear head".into()));
        }
        if spec.input_shape().len() != 3
            || spec.output_shape().len() != 1
            || spec.output_shape()[0] < 2
        {
            return Err(bad(format!(
                "classifier maps {:?} to {:?}; need [c, h, w] to [K >= 2]",
                spec.input_shape(),
                spec.output_shape()
            )));
        }
        params
            .check_against(&spec)
            .map_err(|e| bad(e.to_string()))?;
        Ok(Self {
            spec,
            params,
            descriptor: descriptor.into(),
        })
    }

    /// Archive layout: `meta.spec` holds the network, `meta.descriptor` a
    /// label; tensors are `param/<name>` and `buffer/<name>`.
    pub fn load(path: &Path) -> Result<Self, MetricError> {
        let archive = Archive::load(path)
            .map_err(|e| MetricError::Backend(format!("{}: {e}", path.display())))?;
        let spec: NetworkSpec = serde_json::from_value(archive.meta["spec"].clone())
            .map_err(|e| MetricError::Backend(format!("classifier spec: {e}")))?;
        let descriptor = archive.meta["descriptor"]
            .as_str()
            .map(str::to_string)
            .unwrap_or_else(|| format!("network({})", path.display()));
        let mut tensors = std::collections::BTreeMap::new();
        let mut buffers = std::collections::BTreeMap::new();
        for (name, t) in archive.tensors {
            if let Some(n) = name.strip_prefix("param/") {
                tensors.insert(n.to_string(), t);
            } else if let Some(n) = name.strip_prefix("buffer/") {
                buffers.insert(n.to_string(), t);
            }
        }
        Self::new(
            spec,
            ParameterStore::from_parts(tensors, buffers, None),
            descriptor,
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), MetricError> {
        let mut archive = Archive::new(serde_json::json!({
            "spec": self.spec,
            "descriptor": self.descriptor,
        }));
        for (n, t) in self.params.tensors() {
            archive.tensors.insert(format!("param/{n}"), t.clone());
        }
        for (n, t) in self.params.buffers() {
            archive.tensors.insert(format!("buffer/{n}"), t.clone());
        }
        archive
            .save(path)
            .map_err(|e| MetricError::Backend(e.to_string()))
    }
}

impl ClassifierBackend for NetworkClassifier {
    fn num_classes(&self) -> usize {
        self.spec.output_shape()[0]
    }

    fn descriptor(&self) -> String {
        self.descriptor.clone()
    }

    fn predict(&self, images: &[ImageView]) -> Result<Vec<Vec<f64>>, MetricError> {
        if images.is_empty() {
            return Ok(Vec::new());
        }
        let shape = self.spec.input_shape();
        let (c, h, w) = (shape[0], shape[1], shape[2]);
        let inputs: Vec<Vec<f64>> = images.iter().map(|img| to_input(img, c, h, w)).collect();
        let refs: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
        let batch = Tensor::stack(shape, &refs).map_err(|e| MetricError::Backend(e.to_string()))?;
        let logits = self
            .spec
            .forward(&self.params, &batch)
            .map_err(|e| MetricError::Backend(e.to_string()))?;
        Ok((0..images.len())
            .map(|i| softmax(logits.sample(i)))
            .collect())
    }

    fn reentrant(&self) -> bool {
        true
    }
}
