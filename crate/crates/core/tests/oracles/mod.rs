//! Independent reference implementations used only by tests. Each follows
//! the textbook definition as literally as possible and shares no code with
//! the library.
#![allow(dead_code)]

/// SSIM with a uniform `size × size` window, computed as the literal
/// product `l · c · s` per window (`C3 = C2 / 2`), averaged over windows.
pub fn ssim_uniform(
    x: &[f64],
    y: &[f64],
    h: usize,
    w: usize,
    size: usize,
    c1: f64,
    c2: f64,
) -> f64 {
    let c3 = c2 / 2.0;
    let mut total = 0.0;
    let mut count = 0.0;
    for r in 0..=h - size {
        for c in 0..=w - size {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for i in r..r + size {
                for j in c..c + size {
                    xs.push(x[i * w + j]);
                    ys.push(y[i * w + j]);
                }
            }
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let vx = xs.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>() / n;
            let vy = ys.iter().map(|v| (v - my) * (v - my)).sum::<f64>() / n;
            let cov = xs
                .iter()
                .zip(&ys)
                .map(|(a, b)| (a - mx) * (b - my))
                .sum::<f64>()
                / n;
            let l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
            let cc = (2.0 * vx.sqrt() * vy.sqrt() + c2) / (vx + vy + c2);
            let s = (cov + c3) / (vx.sqrt() * vy.sqrt() + c3);
            total += l * cc * s;
            count += 1.0;
        }
    }
    total / count
}

/// Inception score over a single split straight from the definition.
pub fn inception_score_direct(rows: &[Vec<f64>]) -> f64 {
    let k = rows[0].len();
    let n = rows.len() as f64;
    let mut py = vec![0.0; k];
    for r in rows {
        for j in 0..k {
            py[j] += r[j] / n;
        }
    }
    let mut kl_sum = 0.0;
    for r in rows {
        for j in 0..k {
            if r[j] > 0.0 {
                kl_sum += r[j] * (r[j].ln() - py[j].ln());
            }
        }
    }
    (kl_sum / n).exp()
}

/// Direct-summation 2-D cross-correlation (a convolution with the kernel
/// flipped): `x` is `[c_in, h, w]`, `weight` is `[c_out, c_in, k, k]`.
#[allow(clippy::too_many_arguments)]
pub fn conv2d_direct(
    x: &[f64],
    c_in: usize,
    h: usize,
    w: usize,
    weight: &[f64],
    bias: &[f64],
    c_out: usize,
    k: usize,
    stride: usize,
    pad: usize,
) -> (Vec<f64>, usize, usize) {
    let oh = (h + 2 * pad - k) / stride + 1;
    let ow = (w + 2 * pad - k) / stride + 1;
    let mut y = vec![0.0; c_out * oh * ow];
    for o in 0..c_out {
        for i in 0..oh {
            for j in 0..ow {
                let mut acc = bias[o];
                for c in 0..c_in {
                    for ki in 0..k {
                        for kj in 0..k {
                            let r = (i * stride + ki) as isize - pad as isize;
                            let s = (j * stride + kj) as isize - pad as isize;
                            if r < 0 || s < 0 || r >= h as isize || s >= w as isize {
                                continue;
                            }
                            acc += weight[((o * c_in + c) * k + ki) * k + kj]
                                * x[(c * h + r as usize) * w + s as usize];
                        }
                    }
                }
                y[(o * oh + i) * ow + j] = acc;
            }
        }
    }
    (y, oh, ow)
}

/// Direct-summation transposed convolution (every input pixel scatters a
/// weighted kernel): `weight` is `[c_in, c_out, k, k]`.
#[allow(clippy::too_many_arguments)]
pub fn conv_transpose2d_direct(
    x: &[f64],
    c_in: usize,
    h: usize,
    w: usize,
    weight: &[f64],
    bias: &[f64],
    c_out: usize,
    k: usize,
    stride: usize,
    pad: usize,
) -> (Vec<f64>, usize, usize) {
    let oh = (h - 1) * stride + k - 2 * pad;
    let ow = (w - 1) * stride + k - 2 * pad;
    let mut y = vec![0.0; c_out * oh * ow];
    for o in 0..c_out {
        for v in &mut y[o * oh * ow..(o + 1) * oh * ow] {
            *v = bias[o];
        }
    }
    for c in 0..c_in {
        for i in 0..h {
            for j in 0..w {
                let xv = x[(c * h + i) * w + j];
                for o in 0..c_out {
                    for ki in 0..k {
                        for kj in 0..k {
                            let r = (i * stride + ki) as isize - pad as isize;
                            let s = (j * stride + kj) as isize - pad as isize;
                            if r < 0 || s < 0 || r >= oh as isize || s >= ow as isize {
                                continue;
                            }
                            y[(o * oh + r as usize) * ow + s as usize] +=
                                weight[((c * c_out + o) * k + ki) * k + kj] * xv;
                        }
                    }
                }
            }
        }
    }
    (y, oh, ow)
}

/// Sums of squares from their definitions: SSB via squared deviations of
/// every observation's group mean, SSW via every observation's own deviation.
pub fn anova_brute(groups: &[Vec<f64>]) -> (f64, f64, f64) {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        for x in g {
            ssb += (m - grand) * (m - grand);
            ssw += (x - m) * (x - m);
        }
    }
    let dfb = (groups.len() - 1) as f64;
    let dfw = (all.len() - groups.len()) as f64;
    (ssb, ssw, (ssb / dfb) / (ssw / dfw))
}

/// Central finite differences of `f` at `x` with step `h`.
pub fn finite_difference(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let up = f(&x);
            x[i] = orig - h;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Exact 1-D W1 between equal-size samples via the CDF-difference integral
/// (independent of the sorted-matching formula).
pub fn w1_cdf_integral(a: &[f64], b: &[f64]) -> f64 {
    let mut pts: Vec<f64> = a.iter().chain(b).copied().collect();
    pts.sort_by(f64::total_cmp);
    let cdf = |s: &[f64], t: f64| s.iter().filter(|v| **v <= t).count() as f64 / s.len() as f64;
    pts.windows(2)
        .map(|p| (cdf(a, p[0]) - cdf(b, p[0])).abs() * (p[1] - p[0]))
        .sum()
}

/// `P(F ≥ f)` for `F ~ F(d1, d2)` by Simpson integration of the equivalent
/// Beta(d1/2, d2/2) density (both shape parameters must be at least 1).
pub fn f_survival_by_integration(f: f64, d1: f64, d2: f64) -> f64 {
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    assert!(a >= 1.0 && b >= 1.0);
    let density = |u: f64| u.powf(a - 1.0) * (1.0 - u).powf(b - 1.0);
    let simpson = |lo: f64, hi: f64| {
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let mut s = density(lo) + density(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * density(lo + i as f64 * h);
        }
        s * h / 3.0
    };
    let u0 = d1 * f / (d1 * f + d2);
    simpson(u0, 1.0) / simpson(0.0, 1.0)
}
