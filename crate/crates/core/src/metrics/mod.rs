//! Image-quality metrics: SSIM, PSNR and the Inception Score, plus the
//! strategies that decide which reference image a generated image is scored
//! against.

mod inception;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::ImageSample;

pub use inception::{
    inception_score, inception_score_from_probabilities, ClassifierBackend, InceptionScore,
    NetworkClassifier, ProjectionClassifier, ScriptedClassifier, DEFAULT_SPLITS,
};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("image dimensions differ: {0:?} vs {1:?}")]
    DimMismatch((usize, usize), (usize, usize)),
    #[error("{size}x{size} window does not fit a {height}x{width} image")]
    WindowLargerThanImage {
        size: usize,
        height: usize,
        width: usize,
    },
    #[error("pixel buffer of length {len} does not match {height}x{width}")]
    BadBuffer {
        len: usize,
        height: usize,
        width: usize,
    },
    #[error("need at least {needed} images, got {got}")]
    TooFewImages { needed: usize, got: usize },
    #[error("classifier output row {row} is not a probability vector (sum {sum})")]
    DegenerateClassifier { row: usize, sum: f64 },
    #[error("image counts differ: {0} generated vs {1} reference")]
    SizeMismatch(usize, usize),
    #[error("invalid metric parameter: {0}")]
    InvalidParameter(String),
    #[error("classifier backend: {0}")]
    Backend(String),
}

/// A borrowed single-channel image, row-major.
#[derive(Debug, Clone, Copy)]
pub struct ImageView<'a> {
    pub height: usize,
    pub width: usize,
    pub pixels: &'a [f64],
}

impl<'a> ImageView<'a> {
    pub fn new(height: usize, width: usize, pixels: &'a [f64]) -> Result<Self, MetricError> {
        if pixels.len() != height * width || pixels.is_empty() {
            return Err(MetricError::BadBuffer {
                len: pixels.len(),
                height,
                width,
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

impl<'a> From<&'a ImageSample> for ImageView<'a> {
    fn from(s: &'a ImageSample) -> Self {
        Self {
            height: s.height,
            width: s.width,
            pixels: &s.pixels,
        }
    }
}

fn same_dims(x: &ImageView, y: &ImageView) -> Result<(), MetricError> {
    if x.dims() != y.dims() {
        return Err(MetricError::DimMismatch(x.dims(), y.dims()));
    }
    Ok(())
}

/// Local weighting used for the SSIM statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SsimWindow {
    Gaussian { size: usize, sigma: f64 },
    Uniform { size: usize },
}

impl SsimWindow {
    pub fn size(&self) -> usize {
        match *self {
            SsimWindow::Gaussian { size, .. } | SsimWindow::Uniform { size } => size,
        }
    }

    /// Row-major `size × size` weights summing to one.
    pub fn weights(&self) -> Vec<f64> {
        let size = self.size();
        let raw: Vec<f64> = match *self {
            SsimWindow::Uniform { .. } => vec![1.0; size * size],
            SsimWindow::Gaussian { sigma, .. } => {
                let c = (size as f64 - 1.0) / 2.0;
                (0..size * size)
                    .map(|i| {
                        let dy = (i / size) as f64 - c;
                        let dx = (i % size) as f64 - c;
                        (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
                    })
                    .collect()
            }
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// Stabilizing constants, dynamic range, window and exponents of SSIM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConstants {
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub window: SsimWindow,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SsimConstants {
    /// `C1 = (K1·L)²`, `C2 = (K2·L)²`, `C3 = C2/2`, unit exponents.
    pub fn new(k1: f64, k2: f64, dynamic_range: f64, window: SsimWindow) -> Self {
        let c1 = (k1 * dynamic_range).powi(2);
        let c2 = (k2 * dynamic_range).powi(2);
        Self {
            k1,
            k2,
            dynamic_range,
            c1,
            c2,
            c3: c2 / 2.0,
            window,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }

    pub fn with_exponents(mut self, alpha: f64, beta: f64, gamma: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self.gamma = gamma;
        self
    }

    /// Gaussian 11×11, σ = 1.5, for images in `[0, 1]`.
    pub fn unit_range() -> Self {
        Self::new(
            0.01,
            0.03,
            1.0,
            SsimWindow::Gaussian {
                size: 11,
                sigma: 1.5,
            },
        )
    }

    fn collapses(&self) -> bool {
        self.alpha == 1.0 && self.beta == 1.0 && self.gamma == 1.0 && self.c3 == self.c2 / 2.0
    }
}

impl Default for SsimConstants {
    fn default() -> Self {
        Self::unit_range()
    }
}

/// Per-window luminance, contrast and structure terms and their product.
///
/// All vectors are row-major over the `map_height × map_width` valid window
/// positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimComponents {
    pub l: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub map: Vec<f64>,
    pub map_height: usize,
    pub map_width: usize,
    pub mssim: f64,
}

fn signed_pow(v: f64, e: f64) -> f64 {
    if e == 1.0 {
        v
    } else {
        v.signum() * v.abs().powf(e)
    }
}

/// Windowed SSIM over every position where the window fits inside the image.
pub fn ssim(
    x: &ImageView,
    y: &ImageView,
    k: &SsimConstants,
) -> Result<SsimComponents, MetricError> {
    same_dims(x, y)?;
    let size = k.window.size();
    if size == 0 || size > x.height || size > x.width {
        return Err(MetricError::WindowLargerThanImage {
            size,
            height: x.height,
            width: x.width,
        });
    }
    let w = k.window.weights();
    let (mh, mw) = (x.height - size + 1, x.width - size + 1);
    let n = mh * mw;
    let (mut l, mut c, mut s, mut map) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let at = |img: &ImageView, r: usize, col: usize| img.pixels[r * img.width + col];
    for r0 in 0..mh {
        for c0 in 0..mw {
            let (mut mx, mut my) = (0.0, 0.0);
            for i in 0..size {
                for j in 0..size {
                    let wij = w[i * size + j];
                    mx += wij * at(x, r0 + i, c0 + j);
                    my += wij * at(y, r0 + i, c0 + j);
                }
            }
            // centred second moments: exact symmetry and shift behaviour
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for i in 0..size {
                for j in 0..size {
                    let wij = w[i * size + j];
                    let dx = at(x, r0 + i, c0 + j) - mx;
                    let dy = at(y, r0 + i, c0 + j) - my;
                    vx += wij * dx * dx;
                    vy += wij * dy * dy;
                    cxy += wij * dx * dy;
                }
            }
            let (sx, sy) = (vx.sqrt(), vy.sqrt());
            let li = (2.0 * mx * my + k.c1) / (mx * mx + my * my + k.c1);
            let ci = (2.0 * sx * sy + k.c2) / (vx + vy + k.c2);
            let si = (cxy + k.c3) / (sx * sy + k.c3);
            let value = if k.collapses() {
                (2.0 * mx * my + k.c1) * (2.0 * cxy + k.c2)
                    / ((mx * mx + my * my + k.c1) * (vx + vy + k.c2))
            } else {
                signed_pow(li, k.alpha) * signed_pow(ci, k.beta) * signed_pow(si, k.gamma)
            };
            l.push(li);
            c.push(ci);
            s.push(si);
            map.push(value);
        }
    }
    let mssim = map.iter().sum::<f64>() / n as f64;
    Ok(SsimComponents {
        l,
        c,
        s,
        map,
        map_height: mh,
        map_width: mw,
        mssim,
    })
}

/// Peak signal-to-noise ratio of two images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psnr {
    pub db: f64,
    /// The images were identical; `db` holds the cap sentinel.
    pub exact: bool,
}

pub const PSNR_CAP_DB: f64 = 100.0;

pub fn psnr(x: &ImageView, y: &ImageView, max_i: f64) -> Result<Psnr, MetricError> {
    psnr_with_cap(x, y, max_i, PSNR_CAP_DB)
}

pub fn psnr_with_cap(
    x: &ImageView,
    y: &ImageView,
    max_i: f64,
    cap_db: f64,
) -> Result<Psnr, MetricError> {
    same_dims(x, y)?;
    if !(max_i > 0.0) {
        return Err(MetricError::InvalidParameter(format!(
            "max_i must be positive, got {max_i}"
        )));
    }
    let mse = mse(x.pixels, y.pixels);
    if mse == 0.0 {
        return Ok(Psnr {
            db: cap_db,
            exact: true,
        });
    }
    Ok(Psnr {
        db: 10.0 * (max_i * max_i / mse).log10(),
        exact: false,
    })
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>() / a.len() as f64
}

/// How generated images are matched to reference images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// i-th generated image against the i-th reference.
    #[default]
    Index,
    /// Each generated image against its minimum-MSE reference (with
    /// replacement; ties go to the lowest reference index).
    Nearest,
}

impl Pairing {
    pub fn as_str(self) -> &'static str {
        match self {
            Pairing::Index => "index",
            Pairing::Nearest => "nearest",
        }
    }
}

/// `(generated index, reference index)` for every generated image.
pub fn pair_images(
    generated: &[ImageView],
    reference: &[ImageView],
    strategy: Pairing,
) -> Result<Vec<(usize, usize)>, MetricError> {
    if generated.is_empty() || reference.is_empty() {
        return Err(MetricError::TooFewImages {
            needed: 1,
            got: generated.len().min(reference.len()),
        });
    }
    match strategy {
        Pairing::Index => {
            if generated.len() != reference.len() {
                return Err(MetricError::SizeMismatch(generated.len(), reference.len()));
            }
            Ok((0..generated.len()).map(|i| (i, i)).collect())
        }
        Pairing::Nearest => generated
            .iter()
            .enumerate()
            .map(|(g, gi)| {
                let mut best = (f64::INFINITY, 0);
                for (r, ri) in reference.iter().enumerate() {
                    same_dims(gi, ri)?;
                    let d = mse(gi.pixels, ri.pixels);
                    if d < best.0 {
                        best = (d, r);
                    }
                }
                Ok((g, best.1))
            })
            .collect(),
    }
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Summary of one evaluation pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSnapshot {
    pub epoch: usize,
    pub ssim_mean: f64,
    pub ssim_std: f64,
    pub psnr_mean: f64,
    pub psnr_std: f64,
    pub is_mean: f64,
    pub is_std: f64,
    pub pairing: Pairing,
    pub n_images: usize,
}

/// Scores of one generated image against its paired reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub generated: usize,
    pub reference_id: String,
    pub ssim: f64,
    pub psnr: f64,
    pub psnr_exact: bool,
}

/// Knobs of [`evaluate_images`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub pairing: Pairing,
    pub n_splits: usize,
    pub ssim: SsimConstants,
    pub psnr_cap_db: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            pairing: Pairing::Index,
            n_splits: DEFAULT_SPLITS,
            ssim: SsimConstants::unit_range(),
            psnr_cap_db: PSNR_CAP_DB,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub snapshot: MetricSnapshot,
    pub pairs: Vec<PairScore>,
}

/// Scores generated images (in `[0, 1]`) against `reference`.
///
/// The split count is lowered to the number of images when fewer are
/// available, so small desk-scale test splits still get an Inception Score.
pub fn evaluate_images(
    epoch: usize,
    generated: &[ImageView],
    reference: &[&ImageSample],
    classifier: &dyn ClassifierBackend,
    config: &EvalConfig,
) -> Result<Evaluation, MetricError> {
    let refs: Vec<ImageView> = reference.iter().map(|s| ImageView::from(*s)).collect();
    let pairing = pair_images(generated, &refs, config.pairing)?;
    let mut pairs = Vec::with_capacity(pairing.len());
    for (g, r) in pairing {
        let comp = ssim(&generated[g], &refs[r], &config.ssim)?;
        let p = psnr_with_cap(
            &generated[g],
            &refs[r],
            config.ssim.dynamic_range,
            config.psnr_cap_db,
        )?;
        pairs.push(PairScore {
            generated: g,
            reference_id: reference[r].sample_id.clone(),
            ssim: comp.mssim,
            psnr: p.db,
            psnr_exact: p.exact,
        });
    }
    let splits = config.n_splits.clamp(1, generated.len());
    let is = inception_score(generated, classifier, splits)?;
    let (ssim_mean, ssim_std) = mean_std(&pairs.iter().map(|p| p.ssim).collect::<Vec<_>>());
    let (psnr_mean, psnr_std) = mean_std(&pairs.iter().map(|p| p.psnr).collect::<Vec<_>>());
    Ok(Evaluation {
        snapshot: MetricSnapshot {
            epoch,
            ssim_mean,
            ssim_std,
            psnr_mean,
            psnr_std,
            is_mean: is.mean,
            is_std: is.std,
            pairing: config.pairing,
            n_images: pairs.len(),
        },
        pairs,
    })
}
