//! Block-boundary deblocking for transferred frames.
//!
//! Boundaries are the edges between leaves of the low-resolution partition,
//! scaled onto the high-resolution frame. Each boundary is cut into segments
//! of at most four lines. A segment is filtered when its boundary strength is
//! nonzero and the second-difference activity on both sides stays below
//! `beta`; busy segments are treated as real image edges and left alone.
//! All vertical boundaries are filtered before any horizontal one.

use crate::error::{Error, Result};
use crate::model::{BlockMode, BlockNode, BlockPartition};
use crate::plane::{Picture, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeblockConfig {
    /// Activity threshold separating artificial from real edges.
    pub beta: i32,
    /// Largest correction applied to the samples next to a boundary.
    pub tc: i32,
    pub enabled: bool,
}

impl Default for DeblockConfig {
    fn default() -> Self {
        DeblockConfig {
            beta: 24,
            tc: 6,
            enabled: true,
        }
    }
}

impl DeblockConfig {
    pub fn disabled() -> Self {
        DeblockConfig {
            enabled: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Boundary between horizontally adjacent blocks (a vertical line).
    Vertical,
    /// Boundary between vertically adjacent blocks (a horizontal line).
    Horizontal,
}

/// A run of up to four lines crossing one block boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundarySegment {
    pub orientation: Orientation,
    /// High-resolution column (vertical) or row (horizontal) of the first
    /// sample past the boundary.
    pub position: usize,
    /// First line of the segment (a row for vertical boundaries).
    pub start: usize,
    pub len: usize,
    pub bs: u8,
}

/// Boundary strength between two adjacent leaves: 0 (leave alone), 1 or 2.
///
/// A boundary with exactly one bicubic-fallback side gets 2. Two fallback
/// blocks are cropped from the same continuous upsampling, so their shared
/// edge gets 0. Otherwise the boundary gets 1 if the vectors differ by a
/// whole pixel or more on either axis, or if either block carries a
/// residual.
pub fn compute_boundary_strength(a: &BlockNode, b: &BlockNode) -> Result<u8> {
    if !a.is_adjacent(b) {
        return Err(Error::Logic(format!(
            "blocks at ({}, {}) and ({}, {}) are not adjacent",
            a.x, a.y, b.x, b.y
        )));
    }
    Ok(strength(a, b))
}

fn strength(a: &BlockNode, b: &BlockNode) -> u8 {
    let fa = a.mode == BlockMode::BicubicFallback;
    let fb = b.mode == BlockMode::BicubicFallback;
    if fa && fb {
        return 0;
    }
    if fa || fb {
        return 2;
    }
    if (a.mv.dx - b.mv.dx).abs() >= 4 || (a.mv.dy - b.mv.dy).abs() >= 4 || !a.skip || !b.skip {
        1
    } else {
        0
    }
}

/// Every boundary segment of `partition` on the `alpha`-scaled grid, vertical
/// segments first. Segments with zero strength are included.
pub fn boundary_segments(partition: &BlockPartition, alpha: usize) -> Vec<BoundarySegment> {
    let w = partition.frame_width();
    let h = partition.frame_height();
    let map = partition.leaf_map();
    let leaves = partition.leaves();
    let mut out = Vec::new();

    // Along a boundary at LR coordinate `b`, line `l` (HR) sees leaves
    // `pair(l, b)`.
    let mut scan = |orientation: Orientation, lines: usize, edges: usize, pair: &dyn Fn(usize, usize) -> (u32, u32)| {
        for group in (0..lines).step_by(4) {
            let end = (group + 4).min(lines);
            for b in 1..edges {
                let mut run: Option<(usize, (u32, u32))> = None;
                for line in group..=end {
                    let cur = (line < end).then(|| pair(line / alpha, b)).filter(|(p, q)| p != q);
                    let same = matches!((run, cur), (Some((_, r)), Some(c)) if r == c);
                    if same {
                        continue;
                    }
                    if let Some((start, (p, q))) = run.take() {
                        out.push(BoundarySegment {
                            orientation,
                            position: b * alpha,
                            start,
                            len: line - start,
                            bs: strength(&leaves[p as usize], &leaves[q as usize]),
                        });
                    }
                    if let Some(c) = cur {
                        run = Some((line, c));
                    }
                }
            }
        }
    };
    scan(Orientation::Vertical, h * alpha, w, &|ry, bx| {
        (map[ry * w + bx - 1], map[ry * w + bx])
    });
    scan(Orientation::Horizontal, w * alpha, h, &|rx, by| {
        (map[(by - 1) * w + rx], map[by * w + rx])
    });
    out
}

/// Deblock a transferred frame along the scaled block grid of `partition`.
///
/// Leaf modes in `partition` must reflect the transfer decisions.
pub fn deblock_frame(frame: &Picture, partition: &BlockPartition, alpha: usize, cfg: &DeblockConfig) -> Result<Picture> {
    if frame.dims() != (partition.frame_width() * alpha, partition.frame_height() * alpha) {
        return Err(Error::param(format!(
            "frame is {}x{}, partition scaled by {alpha} is {}x{}",
            frame.width(),
            frame.height(),
            partition.frame_width() * alpha,
            partition.frame_height() * alpha
        )));
    }
    if cfg.beta < 0 || cfg.tc < 0 {
        return Err(Error::param("deblocking thresholds must be non-negative"));
    }
    let mut out = frame.clone();
    if !cfg.enabled {
        return Ok(out);
    }
    let (fw, fh) = out.dims();
    let data = out.data_mut();
    for seg in boundary_segments(partition, alpha) {
        if seg.bs == 0 {
            continue;
        }
        let (pos, extent) = match seg.orientation {
            Orientation::Vertical => (seg.position, fw),
            Orientation::Horizontal => (seg.position, fh),
        };
        let index = |line: usize, off: isize| -> usize {
            let o = (pos as isize + off).clamp(0, extent as isize - 1) as usize;
            match seg.orientation {
                Orientation::Vertical => line * fw + o,
                Orientation::Horizontal => o * fw + line,
            }
        };
        filter_segment(data, &index, seg.start, seg.len, cfg);
    }
    Ok(out)
}

fn filter_segment(data: &mut [u8], index: &dyn Fn(usize, isize) -> usize, start: usize, len: usize, cfg: &DeblockConfig) {
    let s = |data: &[u8], line: usize, off: isize| data[index(line, off)] as i32;
    let side_activity = |data: &[u8], line: usize| {
        let dp = (s(data, line, -3) - 2 * s(data, line, -2) + s(data, line, -1)).abs();
        let dq = (s(data, line, 2) - 2 * s(data, line, 1) + s(data, line, 0)).abs();
        (dp, dq)
    };
    let first = start;
    let last = start + len - 1;
    let (dp0, dq0) = side_activity(data, first);
    let (dp3, dq3) = if last != first { side_activity(data, last) } else { (dp0, dq0) };
    let dp = dp0 + dp3;
    let dq = dq0 + dq3;
    if dp + dq >= cfg.beta {
        return;
    }
    let tc = cfg.tc;
    let half = tc >> 1;
    let adjust_p1 = 4 * dp < cfg.beta;
    let adjust_q1 = 4 * dq < cfg.beta;

    for line in first..=last {
        let p2 = s(data, line, -3);
        let p1 = s(data, line, -2);
        let p0 = s(data, line, -1);
        let q0 = s(data, line, 0);
        let q1 = s(data, line, 1);
        let q2 = s(data, line, 2);
        let delta = (((q0 - p0) * 4 + (p1 - q1) + 4) >> 3).clamp(-tc, tc);
        data[index(line, -1)] = u8::clamp_i32(p0 + delta);
        data[index(line, 0)] = u8::clamp_i32(q0 - delta);
        if adjust_p1 {
            let d = ((((p2 + p0 + 1) >> 1) - p1 + delta) >> 1).clamp(-half, half);
            data[index(line, -2)] = u8::clamp_i32(p1 + d);
        }
        if adjust_q1 {
            let d = ((((q2 + q0 + 1) >> 1) - q1 - delta) >> 1).clamp(-half, half);
            data[index(line, 1)] = u8::clamp_i32(q1 + d);
        }
    }
}
