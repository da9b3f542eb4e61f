//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use fastsr_core::encoder::predict_frame;
use fastsr_core::{BlockPartition, FrameSyntax, Picture, QuarterPelMv, Residual};

/// Catmull-Rom weights for taps at offsets -1, 0, 1, 2, in polynomial form.
pub fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        (-t3 + 2.0 * t2 - t) / 2.0,
        (3.0 * t3 - 5.0 * t2 + 2.0) / 2.0,
        (-3.0 * t3 + 4.0 * t2 + t) / 2.0,
        (t3 - t2) / 2.0,
    ]
}

fn cubic_2d(read: impl Fn(isize, isize) -> f64, x0: isize, tx: f64, y0: isize, ty: f64) -> f64 {
    let wx = catmull_rom(tx);
    let wy = catmull_rom(ty);
    let mut acc = 0.0;
    for j in 0..4 {
        let mut row = 0.0;
        for i in 0..4 {
            row += wx[i] * read(x0 - 1 + i as isize, y0 - 1 + j as isize);
        }
        acc += wy[j] * row;
    }
    acc
}

/// Transfer every leaf of `syntax` onto a new high-resolution frame, one
/// pixel at a time: motion-compensated fetch from `prev_hr` at `alpha`
/// times the vector, plus the cubic upsampling of the leaf's own residual
/// region (edges replicated at the leaf border).
pub fn transfer_oracle(prev_hr: &Picture, syntax: &FrameSyntax, alpha: usize) -> Picture {
    let (w, h) = syntax.dims();
    let a = alpha as isize;
    let mut out = Picture::new(w * alpha, h * alpha).unwrap();
    for leaf in syntax.partition.leaves() {
        let (mx, my) = (leaf.mv.dx as isize * a, leaf.mv.dy as isize * a);
        for v in 0..leaf.h * alpha {
            for u in 0..leaf.w * alpha {
                let hx = (leaf.x * alpha + u) as isize;
                let hy = (leaf.y * alpha + v) as isize;
                let qx = hx * 4 + mx;
                let qy = hy * 4 + my;
                let fetch = cubic_2d(
                    |x, y| prev_hr.get_clamped(x, y) as f64,
                    qx.div_euclid(4),
                    qx.rem_euclid(4) as f64 / 4.0,
                    qy.div_euclid(4),
                    qy.rem_euclid(4) as f64 / 4.0,
                );
                let fetch = fetch.round().clamp(0.0, 255.0);

                let sx = (u as f64 + 0.5) / alpha as f64 - 0.5;
                let sy = (v as f64 + 0.5) / alpha as f64 - 0.5;
                let read = |x: isize, y: isize| {
                    let cx = x.clamp(0, leaf.w as isize - 1) as usize + leaf.x;
                    let cy = y.clamp(0, leaf.h as isize - 1) as usize + leaf.y;
                    syntax.residual.get(cx, cy) as f64
                };
                let res = cubic_2d(read, sx.floor() as isize, sx - sx.floor(), sy.floor() as isize, sy - sy.floor());
                let res = res.round().clamp(-255.0, 255.0);

                out.set(hx as usize, hy as usize, (fetch + res).clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

/// Syntax for `cur` against `reference` with the given per-leaf vectors,
/// lossless residual and skip flags set wherever the residual vanishes.
pub fn forced_syntax(reference: &Picture, cur: &Picture, mut partition: BlockPartition, mvs: &[QuarterPelMv]) -> FrameSyntax {
    for (leaf, &mv) in partition.leaves_mut().iter_mut().zip(mvs) {
        leaf.mv = mv;
    }
    let pred = predict_frame(reference, &partition).unwrap();
    let data = cur.data().iter().zip(pred.data()).map(|(&c, &p)| c as i16 - p as i16).collect();
    let residual = Residual::from_vec(cur.width(), cur.height(), data).unwrap();
    for leaf in partition.leaves_mut() {
        leaf.skip = (leaf.y..leaf.y + leaf.h).all(|y| residual.row(y)[leaf.x..leaf.x + leaf.w].iter().all(|&r| r == 0));
    }
    FrameSyntax::new(1, partition, residual).unwrap()
}

/// A static 128x128 high-resolution frame: smooth shading with a patch of
/// sharp 4x4 checks in the top-left quadrant.
pub fn edge_patch_frame() -> Picture {
    Picture::from_fn(128, 128, |x, y| {
        if x < 64 && y < 64 {
            if (x / 4 + y / 4) % 2 == 0 {
                225
            } else {
                35
            }
        } else {
            (70.0 + 0.5 * x as f64 + 0.3 * y as f64) as u8
        }
    })
    .unwrap()
}

/// Syntax for the static edge-patch clip at scale 2 in which the smooth
/// bottom-right 32x32 low-resolution block is forced to predict from the
/// checked patch.
pub fn ringing_syntax(lr: &Picture) -> FrameSyntax {
    let part = BlockPartition::uniform(lr.width(), lr.height(), 32).unwrap();
    let mut mvs = vec![QuarterPelMv::ZERO; part.len()];
    mvs[3] = QuarterPelMv::from_pixels(-32, -32);
    forced_syntax(lr, lr, part, &mvs)
}
