//! Cubic-convolution resampling.
//!
//! One kernel serves every interpolation in the pipeline: integer-factor
//! upsampling, the residual upsampler of the transfer step, the bicubic
//! baseline, and quarter-pel motion-compensated fetches. Separable passes run
//! at full `f64` precision; rounding (half away from zero) and range clamping
//! happen once, on output. Reads past the plane border replicate edge samples.

use crate::error::{Error, Result};
use crate::model::QuarterPelMv;
use crate::plane::{Picture, Plane, Sample};

/// Scale factors supported by the resamplers.
pub const SCALE_FACTORS: [usize; 3] = [2, 3, 4];

/// Keys cubic convolution kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicKernel {
    /// Sharpness; `-0.5` gives Catmull-Rom.
    pub a: f64,
}

impl Default for CubicKernel {
    fn default() -> Self {
        CubicKernel { a: -0.5 }
    }
}

impl CubicKernel {
    /// Kernel value at signed distance `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let a = self.a;
        let x = x.abs();
        if x <= 1.0 {
            ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
        } else if x < 2.0 {
            ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
        } else {
            0.0
        }
    }

    /// Weights of the taps at offsets `-1, 0, 1, 2` for a sample `phase` in
    /// `[0, 1)` past tap 0.
    pub fn weights(&self, phase: f64) -> [f64; 4] {
        [
            self.eval(1.0 + phase),
            self.eval(phase),
            self.eval(1.0 - phase),
            self.eval(2.0 - phase),
        ]
    }
}

fn check_alpha(alpha: usize) -> Result<()> {
    if SCALE_FACTORS.contains(&alpha) {
        Ok(())
    } else {
        Err(Error::param(format!("scale factor must be 2, 3 or 4, got {alpha}")))
    }
}

/// Tap positions and weights for every output sample along one axis.
struct AxisTaps {
    index: Vec<[usize; 4]>,
    weight: Vec<[f64; 4]>,
}

impl AxisTaps {
    /// Output sample `i` reads source coordinate `(i + 0.5) / alpha - 0.5`.
    fn upsample(src_len: usize, alpha: usize, kernel: &CubicKernel) -> Self {
        let n = src_len * alpha;
        let mut index = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        let last = src_len as isize - 1;
        for i in 0..n {
            let s = (i as f64 + 0.5) / alpha as f64 - 0.5;
            let base = s.floor();
            let phase = s - base;
            let base = base as isize;
            let mut idx = [0usize; 4];
            for (k, slot) in idx.iter_mut().enumerate() {
                *slot = (base - 1 + k as isize).clamp(0, last) as usize;
            }
            index.push(idx);
            weight.push(kernel.weights(phase));
        }
        AxisTaps { index, weight }
    }
}

/// Upsample a row-major `f64` grid by `alpha` without rounding or clamping.
pub fn upsample_values(src: &[f64], width: usize, height: usize, alpha: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if src.len() != width * height || width == 0 {
        return Err(Error::param("grid length does not match its dimensions"));
    }
    let kernel = CubicKernel::default();
    let tx = AxisTaps::upsample(width, alpha, &kernel);
    let ty = AxisTaps::upsample(height, alpha, &kernel);
    let ow = width * alpha;
    let oh = height * alpha;

    let mut horiz = vec![0.0; ow * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        let out = &mut horiz[y * ow..(y + 1) * ow];
        for (o, (idx, w)) in out.iter_mut().zip(tx.index.iter().zip(&tx.weight)) {
            *o = w[0] * row[idx[0]] + w[1] * row[idx[1]] + w[2] * row[idx[2]] + w[3] * row[idx[3]];
        }
    }

    let mut out = vec![0.0; ow * oh];
    for (oy, (idx, w)) in ty.index.iter().zip(&ty.weight).enumerate() {
        let rows = idx.map(|r| &horiz[r * ow..(r + 1) * ow]);
        let dst = &mut out[oy * ow..(oy + 1) * ow];
        for (x, d) in dst.iter_mut().enumerate() {
            *d = w[0] * rows[0][x] + w[1] * rows[1][x] + w[2] * rows[2][x] + w[3] * rows[3][x];
        }
    }
    Ok(out)
}

/// Area-average `alpha`x`alpha` cells of a row-major `f64` grid.
pub fn downsample_values(src: &[f64], width: usize, height: usize, alpha: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if src.len() != width * height {
        return Err(Error::param("grid length does not match its dimensions"));
    }
    if !width.is_multiple_of(alpha) || !height.is_multiple_of(alpha) || width == 0 || height == 0 {
        return Err(Error::param(format!(
            "{width}x{height} is not divisible by scale factor {alpha}"
        )));
    }
    let ow = width / alpha;
    let oh = height / alpha;
    let norm = 1.0 / (alpha * alpha) as f64;
    let mut out = vec![0.0; ow * oh];
    for oy in 0..oh {
        for ox in 0..ow {
            let mut acc = 0.0;
            for y in oy * alpha..(oy + 1) * alpha {
                let row = &src[y * width + ox * alpha..y * width + (ox + 1) * alpha];
                acc += row.iter().sum::<f64>();
            }
            out[oy * ow + ox] = acc * norm;
        }
    }
    Ok(out)
}

fn to_values<T: Sample>(p: &Plane<T>) -> Vec<f64> {
    p.data().iter().map(|s| s.to_f64()).collect()
}

/// Round a grid of values into a plane of `T` samples.
pub fn values_to_plane<T: Sample>(values: &[f64], width: usize, height: usize) -> Result<Plane<T>> {
    Plane::from_vec(width, height, values.iter().map(|&v| T::from_f64(v)).collect())
}

/// Upsample a plane by `alpha` with the cubic kernel.
///
/// Output sample `i` samples the source at `(i + 0.5) / alpha - 0.5` on each
/// axis, so constant planes stay constant.
pub fn bicubic_upsample<T: Sample>(src: &Plane<T>, alpha: usize) -> Result<Plane<T>> {
    let vals = upsample_values(&to_values(src), src.width(), src.height(), alpha)?;
    values_to_plane(&vals, src.width() * alpha, src.height() * alpha)
}

/// Downsample a plane by `alpha`.
///
/// The low-pass prefilter is an `alpha`x`alpha` box; the cubic resampler
/// then reads it at stride `alpha` on the cell centres, where the kernel is
/// at integer phase, so each output sample is the mean of one source cell.
pub fn bicubic_downsample<T: Sample>(src: &Plane<T>, alpha: usize) -> Result<Plane<T>> {
    let vals = downsample_values(&to_values(src), src.width(), src.height(), alpha)?;
    values_to_plane(&vals, src.width() / alpha, src.height() / alpha)
}

/// Cubic weights for the four quarter-pel phases.
pub(crate) fn qpel_weights() -> [[f64; 4]; 4] {
    let k = CubicKernel::default();
    [k.weights(0.0), k.weights(0.25), k.weights(0.5), k.weights(0.75)]
}

/// Fetch the `w`x`h` block whose top-left corner sits at `(x, y)` displaced by
/// `mv` quarter pixels, interpolating fractional positions.
pub fn qpel_fetch_block(
    reference: &Picture,
    x: isize,
    y: isize,
    w: usize,
    h: usize,
    mv: QuarterPelMv,
) -> Result<Vec<u8>> {
    let mut out = vec![0u8; w * h];
    qpel_fetch_into(reference, x, y, w, h, mv, &mut out)?;
    Ok(out)
}

/// [`qpel_fetch_block`] writing into a caller-provided `w * h` buffer.
pub fn qpel_fetch_into(
    reference: &Picture,
    x: isize,
    y: isize,
    w: usize,
    h: usize,
    mv: QuarterPelMv,
    out: &mut [u8],
) -> Result<()> {
    if w == 0 || h == 0 {
        return Err(Error::param("fetch block dimensions must be positive"));
    }
    if out.len() != w * h {
        return Err(Error::param("output buffer does not match block size"));
    }
    let px = x * 4 + mv.dx as isize;
    let py = y * 4 + mv.dy as isize;
    let ix = px.div_euclid(4);
    let iy = py.div_euclid(4);
    let fx = px.rem_euclid(4) as usize;
    let fy = py.rem_euclid(4) as usize;

    let rw = reference.width() as isize;
    let rh = reference.height() as isize;
    let data = reference.data();
    let at = |cx: isize, cy: isize| -> u8 {
        let cx = cx.clamp(0, rw - 1) as usize;
        let cy = cy.clamp(0, rh - 1) as usize;
        data[cy * rw as usize + cx]
    };

    if fx == 0 && fy == 0 {
        let inside = ix >= 0 && iy >= 0 && ix + w as isize <= rw && iy + h as isize <= rh;
        for (r, dst) in out.chunks_exact_mut(w).enumerate() {
            let sy = iy + r as isize;
            if inside {
                let start = sy as usize * rw as usize + ix as usize;
                dst.copy_from_slice(&data[start..start + w]);
            } else {
                for (c, d) in dst.iter_mut().enumerate() {
                    *d = at(ix + c as isize, sy);
                }
            }
        }
        return Ok(());
    }

    let table = qpel_weights();
    let wx = table[fx];
    let wy = table[fy];
    let rows = h + 3;
    let mut horiz = vec![0.0f64; rows * w];
    for r in 0..rows {
        let sy = iy - 1 + r as isize;
        let dst = &mut horiz[r * w..(r + 1) * w];
        for (c, d) in dst.iter_mut().enumerate() {
            let sx = ix + c as isize;
            *d = if fx == 0 {
                at(sx, sy) as f64
            } else {
                wx[0] * at(sx - 1, sy) as f64
                    + wx[1] * at(sx, sy) as f64
                    + wx[2] * at(sx + 1, sy) as f64
                    + wx[3] * at(sx + 2, sy) as f64
            };
        }
    }
    for (r, dst) in out.chunks_exact_mut(w).enumerate() {
        for (c, d) in dst.iter_mut().enumerate() {
            let v = if fy == 0 {
                horiz[(r + 1) * w + c]
            } else {
                wy[0] * horiz[r * w + c]
                    + wy[1] * horiz[(r + 1) * w + c]
                    + wy[2] * horiz[(r + 2) * w + c]
                    + wy[3] * horiz[(r + 3) * w + c]
            };
            *d = u8::from_f64(v);
        }
    }
    Ok(())
}
