//! Seeded elliptical "phantom" images standing in for licensed MRI data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataError, DatasetId, DatasetManifest, ImageSample};

struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    cos: f64,
    sin: f64,
}

impl Ellipse {
    fn random(rng: &mut ChaCha8Rng, cx: f64, cy: f64, a: (f64, f64), b: (f64, f64)) -> Self {
        let theta = rng.random_range(0.0..std::f64::consts::PI);
        Self {
            cx,
            cy,
            a: rng.random_range(a.0..a.1),
            b: rng.random_range(b.0..b.1),
            cos: theta.cos(),
            sin: theta.sin(),
        }
    }

    /// Normalized radius; `< 1` inside.
    fn radius(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.cx;
        let dy = y - self.cy;
        let u = dx * self.cos + dy * self.sin;
        let v = -dx * self.sin + dy * self.cos;
        (u / self.a).powi(2) + (v / self.b).powi(2)
    }
}

/// One phantom: a body ellipse with a linear intensity gradient containing
/// one to three brighter or darker inclusions. Coordinates are in the unit
/// square, rendered with 2×2 supersampling.
pub fn phantom(height: usize, width: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let cx = 0.5 + rng.random_range(-0.06..0.06);
    let cy = 0.5 + rng.random_range(-0.06..0.06);
    let body = Ellipse::random(rng, cx, cy, (0.30, 0.42), (0.26, 0.38));
    let base = rng.random_range(0.35..0.55);
    let grad_angle = rng.random_range(0.0..std::f64::consts::TAU);
    let grad = rng.random_range(0.05..0.2);
    let (gx, gy) = (grad * grad_angle.cos(), grad * grad_angle.sin());

    let inclusions: Vec<(Ellipse, f64)> = (0..rng.random_range(1..=3))
        .map(|_| {
            let r = rng.random_range(0.0..0.15);
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let (ix, iy) = (body.cx + r * t.cos(), body.cy + r * t.sin());
            let e = Ellipse::random(rng, ix, iy, (0.06, 0.14), (0.05, 0.12));
            let level = if rng.random_bool(0.7) {
                rng.random_range(0.75..1.0)
            } else {
                rng.random_range(0.05..0.2)
            };
            (e, level)
        })
        .collect();

    let mut out = vec![0.0; height * width];
    for py in 0..height {
        for px in 0..width {
            let mut acc = 0.0;
            for sy in 0..2 {
                for sx in 0..2 {
                    let x = (px as f64 + 0.25 + 0.5 * sx as f64) / width as f64;
                    let y = (py as f64 + 0.25 + 0.5 * sy as f64) / height as f64;
                    if body.radius(x, y) >= 1.0 {
                        continue;
                    }
                    let mut v = base + gx * (x - body.cx) + gy * (y - body.cy);
                    for (e, level) in &inclusions {
                        if e.radius(x, y) < 1.0 {
                            v = *level;
                        }
                    }
                    acc += v;
                }
            }
            out[py * width + px] = (acc / 4.0).clamp(0.0, 1.0);
        }
    }
    out
}

/// `n` phantoms at `resolution`, identical for identical seeds.
pub fn make_synthetic_dataset(
    n: usize,
    resolution: (usize, usize),
    seed: u64,
) -> Result<DatasetManifest, DataError> {
    if n < 2 {
        return Err(DataError::TooFewSamples(n));
    }
    let (h, w) = resolution;
    if h < super::MIN_RESOLUTION || w < super::MIN_RESOLUTION {
        return Err(DataError::InvalidTarget(h, w));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|i| ImageSample::new(format!("phantom_{i:05}"), h, w, phantom(h, w, &mut rng)))
        .collect::<Result<Vec<_>, _>>()?;
    DatasetManifest::new(DatasetId::Synthetic, resolution, samples)
}
