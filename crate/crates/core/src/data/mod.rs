//! Dataset ingestion and preparation: DICOM import, intensity normalization,
//! resizing, seeded train/test splits, PNG export and synthetic phantoms.

pub mod dicom;
mod synthetic;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use synthetic::{make_synthetic_dataset, phantom};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("no DICOM files found in {0}")]
    EmptyDirectory(PathBuf),
    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },
    #[error("degenerate normalization range: lo = {lo}, hi = {hi}")]
    DegenerateRange { lo: i64, hi: i64 },
    #[error("resize target {0}x{1} is below the 8x8 minimum")]
    InvalidTarget(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("split ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("pixel value {0} outside [0, 1]")]
    PixelOutOfRange(f64),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image codec error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Anatomy label carried by an ingested study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Knee,
    Heart,
    Brain,
}

/// Identity of a prepared dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetId {
    Knee,
    Heart,
    Brain,
    Synthetic,
}

impl From<Modality> for DatasetId {
    fn from(m: Modality) -> Self {
        match m {
            Modality::Knee => DatasetId::Knee,
            Modality::Heart => DatasetId::Heart,
            Modality::Brain => DatasetId::Brain,
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DatasetId::Knee => "knee",
            DatasetId::Heart => "heart",
            DatasetId::Brain => "brain",
            DatasetId::Synthetic => "synthetic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
    Unassigned,
}

/// One decoded study with its raw intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStudy {
    pub source_path: PathBuf,
    pub modality: Modality,
    pub bit_depth: u16,
    pub rows: usize,
    pub columns: usize,
    pub pixels: Vec<i32>,
    pub pixel_min: i32,
    pub pixel_max: i32,
}

/// A file skipped during ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Ingest {
    pub studies: Vec<RawStudy>,
    pub warnings: Vec<IngestWarning>,
}

/// Reads every `*.dcm` file of `directory` in filename order. Unreadable files
/// are skipped and reported; the call fails only if nothing could be read.
pub fn ingest_dicom(directory: &Path, modality: Modality) -> Result<Ingest, DataError> {
    let mut files: Vec<PathBuf> = fs::read_dir(directory)
        .map_err(io_err(directory))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|e| e.eq_ignore_ascii_case("dcm"))
                    .unwrap_or(false)
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(DataError::EmptyDirectory(directory.to_path_buf()));
    }

    let mut out = Ingest::default();
    for path in files {
        match read_study(&path, modality) {
            Ok(study) => out.studies.push(study),
            Err(reason) => {
                log::warn!("skipping {}: {reason}", path.display());
                out.warnings.push(IngestWarning { path, reason });
            }
        }
    }
    if out.studies.is_empty() {
        let first = &out.warnings[0];
        return Err(DataError::CorruptFile {
            path: first.path.clone(),
            reason: format!(
                "all {} files unreadable; first: {}",
                out.warnings.len(),
                first.reason
            ),
        });
    }
    Ok(out)
}

fn read_study(path: &Path, modality: Modality) -> Result<RawStudy, String> {
    let bytes = fs::read(path).map_err(|e| e.to_string())?;
    let img = dicom::read_dicom(&bytes).map_err(|e| e.to_string())?;
    if ![8, 12, 16].contains(&img.bits_stored) {
        return Err(format!("unsupported bit depth {}", img.bits_stored));
    }
    let pixel_min = *img.pixels.iter().min().expect("non-empty");
    let pixel_max = *img.pixels.iter().max().expect("non-empty");
    if pixel_min >= pixel_max {
        return Err("constant image has no intensity range".into());
    }
    Ok(RawStudy {
        source_path: path.to_path_buf(),
        modality,
        bit_depth: img.bits_stored,
        rows: img.rows,
        columns: img.columns,
        pixels: img.pixels,
        pixel_min,
        pixel_max,
    })
}

/// Maps raw intensities affinely so `lo → 0` and `hi → 1`, clamping outside.
pub fn normalize_pixels(raw: &[i32], lo: i64, hi: i64) -> Result<Vec<f64>, DataError> {
    if lo >= hi {
        return Err(DataError::DegenerateRange { lo, hi });
    }
    let span = (hi - lo) as f64;
    Ok(raw
        .iter()
        .map(|&v| ((v as i64 - lo) as f64 / span).clamp(0.0, 1.0))
        .collect())
}

/// Intensity bounds used when normalizing a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", deny_unknown_fields)]
pub enum Normalization {
    /// Each image's own minimum and maximum.
    PerImage,
    /// A fixed window shared by all images.
    Window { lo: i64, hi: i64 },
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::PerImage
    }
}

/// A grayscale image with pixels in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    pub sample_id: String,
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
    pub split: Split,
}

impl ImageSample {
    pub fn new(
        sample_id: impl Into<String>,
        height: usize,
        width: usize,
        pixels: Vec<f64>,
    ) -> Result<Self, DataError> {
        if pixels.len() != height * width {
            return Err(DataError::InvalidManifest(format!(
                "{} pixels for a {height}x{width} image",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(DataError::PixelOutOfRange(bad));
        }
        Ok(Self {
            sample_id: sample_id.into(),
            height,
            width,
            pixels,
            split: Split::Unassigned,
        })
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

impl RawStudy {
    /// Normalizes and resizes this study into a canonical sample.
    pub fn to_sample(
        &self,
        normalization: Normalization,
        target: (usize, usize),
    ) -> Result<ImageSample, DataError> {
        let (lo, hi) = match normalization {
            Normalization::PerImage => (self.pixel_min as i64, self.pixel_max as i64),
            Normalization::Window { lo, hi } => (lo, hi),
        };
        let pixels = normalize_pixels(&self.pixels, lo, hi)?;
        let id = self
            .source_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let sample = ImageSample::new(id, self.rows, self.columns, pixels)?;
        resize(&sample, target)
    }
}

/// Bilinear resampling with half-pixel-centred coordinates and edge clamping.
/// Has no minimum size; [`resize`] applies the dataset-level limits.
pub fn bilinear_resize(
    pixels: &[f64],
    height: usize,
    width: usize,
    target_h: usize,
    target_w: usize,
) -> Vec<f64> {
    if (height, width) == (target_h, target_w) {
        return pixels.to_vec();
    }
    let axis = |out: usize, src: usize| -> Vec<(usize, usize, f64)> {
        let scale = src as f64 / out as f64;
        (0..out)
            .map(|o| {
                let pos = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let i0 = pos.floor() as usize;
                let i1 = (i0 + 1).min(src - 1);
                (i0, i1, pos - i0 as f64)
            })
            .collect()
    };
    let rows = axis(target_h, height);
    let cols = axis(target_w, width);
    let mut out = Vec::with_capacity(target_h * target_w);
    for &(y0, y1, ty) in &rows {
        for &(x0, x1, tx) in &cols {
            let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
            let top = lerp(pixels[y0 * width + x0], pixels[y0 * width + x1], tx);
            let bottom = lerp(pixels[y1 * width + x0], pixels[y1 * width + x1], tx);
            out.push(lerp(top, bottom, ty).clamp(0.0, 1.0));
        }
    }
    out
}

pub const MIN_RESOLUTION: usize = 8;

pub fn resize(sample: &ImageSample, target: (usize, usize)) -> Result<ImageSample, DataError> {
    let (th, tw) = target;
    if th < MIN_RESOLUTION || tw < MIN_RESOLUTION {
        return Err(DataError::InvalidTarget(th, tw));
    }
    Ok(ImageSample {
        pixels: bilinear_resize(&sample.pixels, sample.height, sample.width, th, tw),
        height: th,
        width: tw,
        ..sample.clone()
    })
}

/// A set of equally-sized samples and their split assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub dataset_id: DatasetId,
    pub resolution: (usize, usize),
    pub split_seed: Option<u64>,
    pub split_ratio: Option<f64>,
    pub samples: Vec<ImageSample>,
}

impl DatasetManifest {
    pub fn new(
        dataset_id: DatasetId,
        resolution: (usize, usize),
        samples: Vec<ImageSample>,
    ) -> Result<Self, DataError> {
        if let Some(s) = samples.iter().find(|s| s.resolution() != resolution) {
            return Err(DataError::InvalidManifest(format!(
                "sample {} is {}x{}, manifest declares {}x{}",
                s.sample_id, s.height, s.width, resolution.0, resolution.1
            )));
        }
        Ok(Self {
            dataset_id,
            resolution,
            split_seed: None,
            split_ratio: None,
            samples,
        })
    }

    pub fn samples_in(&self, split: Split) -> impl Iterator<Item = &ImageSample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn train(&self) -> Vec<&ImageSample> {
        self.samples_in(Split::Train).collect()
    }

    pub fn test(&self) -> Vec<&ImageSample> {
        self.samples_in(Split::Test).collect()
    }
}

/// Number of training samples for `n` samples at `ratio`: `⌊ratio·n⌋`, kept
/// within `[1, n-1]` so both sides are non-empty.
pub fn train_count(n: usize, ratio: f64) -> usize {
    // the epsilon absorbs representation error such as 0.7 * 10 = 6.999…
    let raw = (ratio * n as f64 + 1e-9).floor() as usize;
    raw.clamp(1, n - 1)
}

/// Seeded partition into train and test. The shuffle starts from the samples
/// ordered by id, so the assignment does not depend on the current order or on
/// any previous split.
pub fn split(
    manifest: &DatasetManifest,
    ratio: f64,
    seed: u64,
) -> Result<DatasetManifest, DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::InvalidRatio(ratio));
    }
    let n = manifest.samples.len();
    if n < 2 {
        return Err(DataError::TooFewSamples(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        manifest.samples[a]
            .sample_id
            .cmp(&manifest.samples[b].sample_id)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = train_count(n, ratio);
    let mut out = manifest.clone();
    for (rank, &idx) in order.iter().enumerate() {
        out.samples[idx].split = if rank < n_train {
            Split::Train
        } else {
            Split::Test
        };
    }
    out.split_seed = Some(seed);
    out.split_ratio = Some(ratio);
    Ok(out)
}

/// Quantizes `[0,1]` to a byte, rounding halves away from zero.
pub fn quantize(pixel: f64) -> u8 {
    (pixel * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Writes an 8-bit grayscale PNG.
pub fn export_png(sample: &ImageSample, path: &Path) -> Result<(), DataError> {
    if let Some(&bad) = sample.pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(DataError::PixelOutOfRange(bad));
    }
    let bytes: Vec<u8> = sample.pixels.iter().map(|&p| quantize(p)).collect();
    let img = image::GrayImage::from_raw(sample.width as u32, sample.height as u32, bytes)
        .expect("buffer matches dimensions");
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| DataError::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a PNG back as a sample with pixels `byte / 255`.
pub fn import_png(path: &Path, sample_id: impl Into<String>) -> Result<ImageSample, DataError> {
    let img = image::open(path)
        .map_err(|source| DataError::Image {
            path: path.to_path_buf(),
            source,
        })?
        .into_luma8();
    let (w, h) = img.dimensions();
    let pixels = img
        .into_raw()
        .into_iter()
        .map(|b| b as f64 / 255.0)
        .collect();
    ImageSample::new(sample_id, h as usize, w as usize, pixels)
}

/// One entry of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub file: String,
    pub split: Split,
}

/// The on-disk `manifest.json` schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub dataset_id: DatasetId,
    pub resolution: [usize; 2],
    pub split_seed: Option<u64>,
    pub split_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub samples: Vec<ManifestEntry>,
}

impl ManifestFile {
    pub fn read(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text)
            .map_err(|e| DataError::InvalidManifest(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), DataError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(io_err(path))
    }

    /// Loads every referenced PNG, resolving files relative to `root`.
    pub fn load(&self, root: &Path) -> Result<DatasetManifest, DataError> {
        let resolution = (self.resolution[0], self.resolution[1]);
        let mut samples = Vec::with_capacity(self.samples.len());
        for entry in &self.samples {
            let mut s = import_png(&root.join(&entry.file), entry.sample_id.clone())?;
            s.split = entry.split;
            samples.push(s);
        }
        let mut m = DatasetManifest::new(self.dataset_id, resolution, samples)?;
        m.split_seed = self.split_seed;
        m.split_ratio = self.split_ratio;
        Ok(m)
    }
}

/// Writes every sample as `images/<sample_id>.png` under `root` and returns the
/// manifest describing them.
pub fn export_dataset(manifest: &DatasetManifest, root: &Path) -> Result<ManifestFile, DataError> {
    let mut entries = Vec::with_capacity(manifest.samples.len());
    for s in &manifest.samples {
        let file = format!("images/{}.png", s.sample_id);
        export_png(s, &root.join(&file))?;
        entries.push(ManifestEntry {
            sample_id: s.sample_id.clone(),
            file,
            split: s.split,
        });
    }
    Ok(ManifestFile {
        dataset_id: manifest.dataset_id,
        resolution: [manifest.resolution.0, manifest.resolution.1],
        split_seed: manifest.split_seed,
        split_ratio: manifest.split_ratio,
        config_hash: None,
        samples: entries,
    })
}
