//! Metric-over-epoch line charts rendered straight into an RGB raster.
//!
//! No font files are needed: labels use a built-in 5×7 bitmap glyph set
//! (digits, a few symbols and the capital letters), and all text is drawn
//! upper-case.

use std::path::Path;

use image::{Rgb, RgbImage};

const WIDTH: u32 = 720;
const HEIGHT: u32 = 440;
const LEFT: i64 = 78;
const RIGHT: i64 = 24;
const TOP: i64 = 44;
const BOTTOM: i64 = 56;

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const INK: Rgb<u8> = Rgb([20, 20, 20]);
const GRID: Rgb<u8> = Rgb([226, 226, 226]);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Square,
    Circle,
    Triangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: Rgb<u8>,
    pub marker: Marker,
    /// `(epoch, value)` in drawing order.
    pub points: Vec<(f64, f64)>,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: &'a [Series],
}

fn glyph(c: char) -> [u8; 7] {
    match c {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '(' => [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
        ')' => [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'Y' => [0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04],
        _ => [0; 7],
    }
}

struct Canvas(RgbImage);

impl Canvas {
    fn put(&mut self, x: i64, y: i64, c: Rgb<u8>) {
        if x >= 0 && y >= 0 && (x as u32) < WIDTH && (y as u32) < HEIGHT {
            self.0.put_pixel(x as u32, y as u32, c);
        }
    }

    fn rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb<u8>) {
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.put(x, y, c);
            }
        }
    }

    /// Bresenham segment, `thick` pixels wide.
    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>, thick: i64) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.rect(x, y, x + thick - 1, y + thick - 1, c);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn marker(&mut self, x: i64, y: i64, m: Marker, c: Rgb<u8>) {
        const R: i64 = 4;
        for dy in -R..=R {
            for dx in -R..=R {
                let inside = match m {
                    Marker::Square => true,
                    Marker::Circle => dx * dx + dy * dy <= R * R,
                    // Apex up, base on the bottom row.
                    Marker::Triangle => 2 * dx.abs() <= dy + R,
                };
                if inside {
                    self.put(x + dx, y + dy, c);
                }
            }
        }
    }

    fn text(&mut self, x: i64, y: i64, s: &str, c: Rgb<u8>) {
        for (i, ch) in s.to_uppercase().chars().enumerate() {
            let rows = glyph(ch);
            for (r, bits) in rows.iter().enumerate() {
                for col in 0..5 {
                    if bits & (0x10 >> col) != 0 {
                        self.put(x + i as i64 * 6 + col, y + r as i64, c);
                    }
                }
            }
        }
    }
}

fn text_width(s: &str) -> i64 {
    s.chars().count() as i64 * 6
}

/// Tick positions on a 1/2/5 grid covering `[lo, hi]`, about `target` of them.
fn ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 {
            lo.abs() * 0.1
        } else {
            0.5
        };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.06;
    (lo - pad, hi + pad)
}

/// Draws the chart and returns the raster.
pub fn render(chart: &Chart) -> RgbImage {
    let mut cv = Canvas(RgbImage::from_pixel(WIDTH, HEIGHT, WHITE));
    let (x0, x1) = (LEFT, WIDTH as i64 - RIGHT);
    let (y0, y1) = (TOP, HEIGHT as i64 - BOTTOM);

    let xs: Vec<f64> = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    let (mut xlo, mut xhi) = (
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    if !(xhi > xlo) {
        // No points or a single epoch; centre it.
        let mid = if xlo.is_finite() { xlo } else { 0.0 };
        xlo = mid - 1.0;
        xhi = mid + 1.0;
    }
    let (ylo, yhi) = padded_range(
        chart
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1)),
    );
    let px = |x: f64| x0 + ((x - xlo) / (xhi - xlo) * (x1 - x0) as f64).round() as i64;
    let py = |y: f64| y1 - ((y - ylo) / (yhi - ylo) * (y1 - y0) as f64).round() as i64;

    let (yt, ydec) = ticks(ylo, yhi, 5);
    for v in &yt {
        let y = py(*v);
        cv.line((x0, y), (x1, y), GRID, 1);
        let label = format!("{v:.ydec$}");
        cv.text(x0 - 8 - text_width(&label), y - 3, &label, INK);
    }
    let (xt, xdec) = ticks(xlo, xhi, 6);
    for v in &xt {
        let x = px(*v);
        cv.line((x, y0), (x, y1), GRID, 1);
        let label = format!("{v:.xdec$}");
        cv.text(x - text_width(&label) / 2, y1 + 10, &label, INK);
    }
    cv.line((x0, y1), (x1, y1), INK, 1);
    cv.line((x0, y0), (x0, y1), INK, 1);

    cv.text(
        (WIDTH as i64 - text_width(chart.title)) / 2,
        14,
        chart.title,
        INK,
    );
    cv.text(
        (x0 + x1 - text_width(chart.x_label)) / 2,
        HEIGHT as i64 - 22,
        chart.x_label,
        INK,
    );
    cv.text(8, TOP - 18, chart.y_label, INK);

    for s in chart.series {
        let pts: Vec<(i64, i64)> = s
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y)| (px(x), py(y)))
            .collect();
        for w in pts.windows(2) {
            cv.line(w[0], w[1], s.color, 2);
        }
        for &(x, y) in &pts {
            cv.marker(x, y, s.marker, s.color);
        }
    }

    // Legend in the top-right corner of the plot area.
    let widest = chart
        .series
        .iter()
        .map(|s| text_width(&s.label))
        .max()
        .unwrap_or(0);
    let lx = x1 - widest - 40;
    for (i, s) in chart.series.iter().enumerate() {
        let ly = y0 + 10 + i as i64 * 16;
        cv.line((lx, ly + 3), (lx + 20, ly + 3), s.color, 2);
        cv.marker(lx + 10, ly + 3, s.marker, s.color);
        cv.text(lx + 28, ly, &s.label, INK);
    }
    cv.0
}

pub fn save(chart: &Chart, path: &Path) -> Result<(), image::ImageError> {
    render(chart).save_with_format(path, image::ImageFormat::Png)
}
