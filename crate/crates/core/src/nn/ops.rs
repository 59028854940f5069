//! Low-level kernels: strided GEMM and the im2col/col2im pair that both
//! convolution directions are built on.

/// Row-major matrix operand, optionally read transposed.
#[derive(Clone, Copy)]
pub(crate) struct Mat<'a> {
    pub data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub transposed: bool,
}

impl<'a> Mat<'a> {
    pub fn new(data: &'a [f64], rows: usize, cols: usize) -> Self {
        Self {
            data,
            rows,
            cols,
            transposed: false,
        }
    }

    pub fn t(self) -> Self {
        Self {
            transposed: !self.transposed,
            ..self
        }
    }

    fn logical_dims(&self) -> (usize, usize) {
        if self.transposed {
            (self.cols, self.rows)
        } else {
            (self.rows, self.cols)
        }
    }

    fn strides(&self) -> (isize, isize) {
        if self.transposed {
            (1, self.cols as isize)
        } else {
            (self.cols as isize, 1)
        }
    }
}

/// `out = a · b + beta · out`, with `out` row-major.
pub(crate) fn gemm(a: Mat<'_>, b: Mat<'_>, beta: f64, out: &mut [f64]) {
    let (m, k) = a.logical_dims();
    let (k2, n) = b.logical_dims();
    assert_eq!(k, k2, "gemm inner dimensions differ");
    assert_eq!(out.len(), m * n, "gemm output size");
    assert_eq!(a.data.len(), a.rows * a.cols);
    assert_eq!(b.data.len(), b.rows * b.cols);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.iter_mut().for_each(|v| *v *= beta);
        return;
    }
    let (rsa, csa) = a.strides();
    let (rsb, csb) = b.strides();
    // SAFETY: dimensions and strides were checked against the slice lengths
    // above; every index touched lies inside its slice.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Geometry of a 2-D sliding window over a `[channels, height, width]` image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Window {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl Window {
    pub fn out_height(&self) -> usize {
        (self.height + 2 * self.padding - self.kernel) / self.stride + 1
    }

    pub fn out_width(&self) -> usize {
        (self.width + 2 * self.padding - self.kernel) / self.stride + 1
    }

    pub fn col_rows(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    pub fn col_cols(&self) -> usize {
        self.out_height() * self.out_width()
    }
}

/// Unfolds an image into a `[channels·k·k, out_h·out_w]` patch matrix.
pub(crate) fn im2col(image: &[f64], g: Window, cols: &mut [f64]) {
    let (oh, ow) = (g.out_height(), g.out_width());
    debug_assert_eq!(cols.len(), g.col_rows() * oh * ow);
    let pad = g.padding as isize;
    for c in 0..g.channels {
        let plane = &image[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = (c * g.kernel + ki) * g.kernel + kj;
                let dst = &mut cols[row * oh * ow..(row + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = (oy * g.stride + ki) as isize - pad;
                    let line = &mut dst[oy * ow..(oy + 1) * ow];
                    if iy < 0 || iy >= g.height as isize {
                        line.iter_mut().for_each(|v| *v = 0.0);
                        continue;
                    }
                    let src = &plane[iy as usize * g.width..(iy as usize + 1) * g.width];
                    for (ox, v) in line.iter_mut().enumerate() {
                        let ix = (ox * g.stride + kj) as isize - pad;
                        *v = if ix < 0 || ix >= g.width as isize {
                            0.0
                        } else {
                            src[ix as usize]
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters patch columns back into an image,
/// accumulating overlaps.
pub(crate) fn col2im(cols: &[f64], g: Window, image: &mut [f64]) {
    let (oh, ow) = (g.out_height(), g.out_width());
    debug_assert_eq!(cols.len(), g.col_rows() * oh * ow);
    let pad = g.padding as isize;
    for c in 0..g.channels {
        let plane = &mut image[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = (c * g.kernel + ki) * g.kernel + kj;
                let src = &cols[row * oh * ow..(row + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = (oy * g.stride + ki) as isize - pad;
                    if iy < 0 || iy >= g.height as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * g.width..(iy as usize + 1) * g.width];
                    for ox in 0..ow {
                        let ix = (ox * g.stride + kj) as isize - pad;
                        if ix >= 0 && ix < g.width as isize {
                            dst[ix as usize] += src[oy * ow + ox];
                        }
                    }
                }
            }
        }
    }
}
