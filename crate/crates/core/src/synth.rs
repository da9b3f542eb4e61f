//! Procedural test content.
//!
//! Scenes are continuous functions of position, so a frame shifted by any
//! sub-pixel amount is rendered exactly rather than interpolated. Content
//! mixes multi-octave value noise (textures, smooth shading) with
//! hard-edged shapes, and clips combine a camera pan with independently
//! moving objects.

use crate::plane::{Picture, Sample};

fn hash(mut v: u64) -> u64 {
    v ^= v >> 33;
    v = v.wrapping_mul(0xff51_afd7_ed55_8ccd);
    v ^= v >> 33;
    v = v.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    v ^ (v >> 33)
}

fn lattice(seed: u64, octave: u32, ix: i64, iy: i64) -> f64 {
    let k = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((octave as u64) << 48)
        .wrapping_add((ix as u64).wrapping_mul(0x0100_0000_01b3))
        .wrapping_add((iy as u64).wrapping_mul(0x5851_f42d_4c95_7f2d));
    (hash(k) >> 11) as f64 / (1u64 << 53) as f64
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// Smooth value noise in `[0, 1]` with the given lattice period.
fn value_noise(seed: u64, octave: u32, x: f64, y: f64, period: f64) -> f64 {
    let gx = x / period;
    let gy = y / period;
    let ix = gx.floor();
    let iy = gy.floor();
    let tx = fade(gx - ix);
    let ty = fade(gy - iy);
    let (ix, iy) = (ix as i64, iy as i64);
    let v00 = lattice(seed, octave, ix, iy);
    let v10 = lattice(seed, octave, ix + 1, iy);
    let v01 = lattice(seed, octave, ix, iy + 1);
    let v11 = lattice(seed, octave, ix + 1, iy + 1);
    let a = v00 + (v10 - v00) * tx;
    let b = v01 + (v11 - v01) * tx;
    a + (b - a) * ty
}

/// Multi-octave noise in roughly `[0, 1]`. `detail` weights the fine octaves.
fn fractal(seed: u64, x: f64, y: f64, base_period: f64, detail: f64) -> f64 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut amp = 1.0;
    let mut period = base_period;
    for octave in 0..5 {
        sum += amp * value_noise(seed, octave, x, y, period);
        norm += amp;
        amp *= detail;
        period /= 2.0;
    }
    sum / norm
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x < x1 && y >= y0 && y < y1,
        }
    }
}

#[derive(Debug, Clone)]
struct Object {
    shape: Shape,
    /// Motion in pixels per frame.
    velocity: (f64, f64),
    level: f64,
    texture_seed: u64,
}

/// A procedural scene observed by a panning camera.
#[derive(Debug, Clone)]
pub struct Scene {
    seed: u64,
    period: f64,
    detail: f64,
    background: Vec<(Shape, f64)>,
    objects: Vec<Object>,
    /// Camera motion in pixels per frame.
    pan: (f64, f64),
    /// Supersampling factor per axis.
    aa: usize,
}

impl Scene {
    /// Textured background with a scattering of hard-edged shapes.
    pub fn natural(seed: u64, width: usize, height: usize) -> Self {
        let mut background = Vec::new();
        let (w, h) = (width as f64, height as f64);
        for i in 0..6u64 {
            let r = |k: u64| lattice(seed ^ 0xabcd, 7, i as i64, k as i64);
            let shape = if i % 2 == 0 {
                Shape::Disk {
                    cx: r(0) * w,
                    cy: r(1) * h,
                    r: 8.0 + r(2) * w.min(h) / 6.0,
                }
            } else {
                let x0 = r(0) * w;
                let y0 = r(1) * h;
                Shape::Rect {
                    x0,
                    y0,
                    x1: x0 + 10.0 + r(2) * w / 5.0,
                    y1: y0 + 10.0 + r(3) * h / 5.0,
                }
            };
            background.push((shape, 0.15 + 0.7 * r(4)));
        }
        Scene {
            seed,
            period: 48.0,
            detail: 0.55,
            background,
            objects: Vec::new(),
            pan: (0.0, 0.0),
            aa: 2,
        }
    }

    /// Smooth shading only: no shapes and little fine detail.
    pub fn smooth(seed: u64) -> Self {
        Scene {
            seed,
            period: 96.0,
            detail: 0.2,
            background: Vec::new(),
            objects: Vec::new(),
            pan: (0.0, 0.0),
            aa: 1,
        }
    }

    pub fn with_pan(mut self, dx: f64, dy: f64) -> Self {
        self.pan = (dx, dy);
        self
    }

    /// Add a textured disk moving independently of the camera.
    pub fn with_moving_disk(mut self, cx: f64, cy: f64, r: f64, velocity: (f64, f64)) -> Self {
        let texture_seed = hash(self.seed ^ (self.objects.len() as u64 + 17));
        self.objects.push(Object {
            shape: Shape::Disk { cx, cy, r },
            velocity,
            level: 0.8,
            texture_seed,
        });
        self
    }

    fn sample(&self, x: f64, y: f64, t: f64) -> f64 {
        for obj in self.objects.iter().rev() {
            let ox = x - obj.velocity.0 * t;
            let oy = y - obj.velocity.1 * t;
            if obj.shape.contains(ox, oy) {
                let tex = fractal(obj.texture_seed, ox, oy, 12.0, 0.6);
                return 0.5 * obj.level + 0.5 * tex;
            }
        }
        let bx = x + self.pan.0 * t;
        let by = y + self.pan.1 * t;
        let mut v = fractal(self.seed, bx, by, self.period, self.detail);
        for (shape, level) in &self.background {
            if shape.contains(bx, by) {
                v = 0.35 * v + 0.65 * level;
            }
        }
        v
    }

    /// Render frame `t` at `width` x `height`.
    pub fn render(&self, width: usize, height: usize, t: f64) -> Picture {
        let n = self.aa.max(1);
        let step = 1.0 / n as f64;
        Picture::from_fn(width, height, |x, y| {
            let mut acc = 0.0;
            for sy in 0..n {
                for sx in 0..n {
                    let px = x as f64 + (sx as f64 + 0.5) * step - 0.5;
                    let py = y as f64 + (sy as f64 + 0.5) * step - 0.5;
                    acc += self.sample(px, py, t);
                }
            }
            let v = acc / (n * n) as f64;
            u8::from_f64(16.0 + 223.0 * v.clamp(0.0, 1.0))
        })
        .expect("positive dimensions")
    }

    pub fn clip(&self, width: usize, height: usize, frames: usize) -> Vec<Picture> {
        (0..frames).map(|t| self.render(width, height, t as f64)).collect()
    }
}

/// Slowly panning natural-looking clip.
pub fn pan_clip(width: usize, height: usize, frames: usize, seed: u64) -> Vec<Picture> {
    Scene::natural(seed, width, height)
        .with_pan(0.75, 0.5)
        .clip(width, height, frames)
}

/// Panning background with two objects moving against it.
pub fn mixed_motion_clip(width: usize, height: usize, frames: usize, seed: u64) -> Vec<Picture> {
    let (w, h) = (width as f64, height as f64);
    Scene::natural(seed, width, height)
        .with_pan(0.5, 0.25)
        .with_moving_disk(w * 0.3, h * 0.4, h * 0.18, (2.25, 0.75))
        .with_moving_disk(w * 0.7, h * 0.6, h * 0.12, (-1.5, -1.0))
        .clip(width, height, frames)
}

/// `frames` copies of one natural image.
pub fn static_clip(width: usize, height: usize, frames: usize, seed: u64) -> Vec<Picture> {
    let f = Scene::natural(seed, width, height).render(width, height, 0.0);
    vec![f; frames]
}
