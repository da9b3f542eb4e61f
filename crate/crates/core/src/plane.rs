//! Two-dimensional sample grids.
//!
//! Pictures hold unsigned 8-bit samples, residuals hold signed 16-bit samples
//! restricted to `[-255, 255]`. Both share [`Plane`], parameterised over the
//! [`Sample`] kind. Coordinates are `x` = column, `y` = row, origin top-left.

use std::fmt;

use crate::error::{Error, Result};

/// A sample type that can live in a [`Plane`].
pub trait Sample: Copy + Default + PartialEq + Send + Sync + fmt::Debug + 'static {
    /// Smallest legal value.
    const MIN: i32;
    /// Largest legal value.
    const MAX: i32;

    fn to_i32(self) -> i32;

    fn to_f64(self) -> f64 {
        self.to_i32() as f64
    }

    /// Convert from an integer already known to lie in `[MIN, MAX]`.
    fn from_i32_unchecked(v: i32) -> Self;

    /// Clamp an integer into the legal range.
    fn clamp_i32(v: i32) -> Self {
        Self::from_i32_unchecked(v.clamp(Self::MIN, Self::MAX))
    }

    /// Round half away from zero, then clamp into the legal range.
    fn from_f64(v: f64) -> Self {
        let r = v.round();
        let r = r.clamp(Self::MIN as f64, Self::MAX as f64);
        Self::from_i32_unchecked(r as i32)
    }
}

impl Sample for u8 {
    const MIN: i32 = 0;
    const MAX: i32 = 255;

    #[inline]
    fn to_i32(self) -> i32 {
        self as i32
    }

    #[inline]
    fn from_i32_unchecked(v: i32) -> Self {
        v as u8
    }
}

impl Sample for i16 {
    const MIN: i32 = -255;
    const MAX: i32 = 255;

    #[inline]
    fn to_i32(self) -> i32 {
        self as i32
    }

    #[inline]
    fn from_i32_unchecked(v: i32) -> Self {
        v as i16
    }
}

/// Row-major grid of samples.
#[derive(Clone, PartialEq, Eq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit picture plane.
pub type Picture = Plane<u8>;
/// Signed prediction residual plane.
pub type Residual = Plane<i16>;

impl<T: Sample> Plane<T> {
    /// A plane with every sample set to `value`.
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        check_dims(width, height)?;
        Self::check_value(value, 0)?;
        Ok(Plane {
            width,
            height,
            data: vec![value; width * height],
        })
    }

    /// A zero-initialised plane.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, T::default())
    }

    /// Wrap an existing row-major buffer.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::param(format!(
                "buffer holds {} samples, {width}x{height} plane needs {}",
                data.len(),
                width * height
            )));
        }
        for (i, &v) in data.iter().enumerate() {
            Self::check_value(v, i)?;
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    /// Build a plane by evaluating `f(x, y)` at every sample.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                Self::check_value(v, y * width + x)?;
                data.push(v);
            }
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    fn check_value(v: T, index: usize) -> Result<()> {
        let i = v.to_i32();
        if i < T::MIN || i > T::MAX {
            return Err(Error::param(format!(
                "sample {i} at index {index} outside [{}, {}]",
                T::MIN,
                T::MAX
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Sample at `(x, y)` with coordinates clamped into the plane (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    /// Set a sample, clamping into the legal range.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        let v = T::clamp_i32(v.to_i32());
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Borrow the `w`x`h` region whose top-left corner is `(x, y)`.
    pub fn region(&self, x: usize, y: usize, w: usize, h: usize) -> Result<PlaneView<'_, T>> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::Bounds {
                x,
                y,
                w,
                h,
                width: self.width,
                height: self.height,
            });
        }
        Ok(PlaneView {
            plane: self,
            x,
            y,
            w,
            h,
        })
    }

    /// Overwrite the region at `(x, y)` with `block` (row-major, `w` wide).
    pub fn write_block(&mut self, x: usize, y: usize, w: usize, block: &[T]) -> Result<()> {
        if w == 0 || !block.len().is_multiple_of(w) {
            return Err(Error::param("block length is not a multiple of its width"));
        }
        let h = block.len() / w;
        if x + w > self.width || y + h > self.height {
            return Err(Error::Bounds {
                x,
                y,
                w,
                h,
                width: self.width,
                height: self.height,
            });
        }
        for (r, src) in block.chunks_exact(w).enumerate() {
            let start = (y + r) * self.width + x;
            self.data[start..start + w].copy_from_slice(src);
        }
        Ok(())
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T: fmt::Debug> fmt::Debug for Plane<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Plane")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::param(format!("plane dimensions must be positive, got {width}x{height}")));
    }
    Ok(())
}

/// Borrowed rectangular window into a [`Plane`].
#[derive(Clone, Copy)]
pub struct PlaneView<'a, T> {
    plane: &'a Plane<T>,
    x: usize,
    y: usize,
    w: usize,
    h: usize,
}

impl<'a, T: Sample> PlaneView<'a, T> {
    #[inline]
    pub fn width(&self) -> usize {
        self.w
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.h
    }

    /// Origin of the view within its parent plane.
    pub fn origin(&self) -> (usize, usize) {
        (self.x, self.y)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.plane.get(self.x + x, self.y + y)
    }

    #[inline]
    pub fn row(&self, y: usize) -> &'a [T] {
        let start = (self.y + y) * self.plane.width + self.x;
        &self.plane.data[start..start + self.w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [T]> + '_ {
        (0..self.h).map(move |y| self.row(y))
    }

    /// Copy the window into its own plane.
    pub fn to_plane(&self) -> Plane<T> {
        let mut data = Vec::with_capacity(self.w * self.h);
        for r in self.rows() {
            data.extend_from_slice(r);
        }
        Plane {
            width: self.w,
            height: self.h,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(Picture::from_vec(2, 2, vec![0; 3]).is_err());
        assert!(Picture::new(0, 4).is_err());
        assert!(Residual::from_vec(1, 1, vec![256]).is_err());
        assert!(Residual::from_vec(1, 1, vec![-255]).is_ok());
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(u8::from_f64(127.5), 128);
        assert_eq!(u8::from_f64(-3.0), 0);
        assert_eq!(u8::from_f64(300.2), 255);
        assert_eq!(i16::from_f64(-2.5), -3);
        assert_eq!(i16::from_f64(2.5), 3);
        assert_eq!(i16::from_f64(-400.0), -255);
    }

    #[test]
    fn region_views() {
        let p = Picture::from_fn(16, 16, |x, y| (y * 16 + x) as u8).unwrap();
        let tl = p.region(0, 0, 8, 8).unwrap();
        assert_eq!(tl.get(0, 0), 0);
        assert_eq!(tl.get(7, 7), 7 * 16 + 7);
        let br = p.region(8, 8, 8, 8).unwrap();
        assert_eq!(br.get(0, 0), 8 * 16 + 8);
        assert_eq!(br.row(7), &p.row(15)[8..]);
        assert!(matches!(p.region(12, 12, 8, 8), Err(Error::Bounds { .. })));
    }
}
