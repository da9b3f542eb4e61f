//! Block-matching motion estimation.
//!
//! Full search over whole-pixel offsets followed by half- and quarter-pel
//! refinement around the winner. Costs are sums of absolute differences.

use crate::error::{Error, Result};
use crate::model::{BlockNode, QuarterPelMv};
use crate::plane::Picture;
use crate::sampling::qpel_fetch_into;

/// Finest motion-vector precision the search may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum MvPrecision {
    Integer,
    Half,
    #[default]
    Quarter,
}

impl MvPrecision {
    pub const ALL: [MvPrecision; 3] = [MvPrecision::Integer, MvPrecision::Half, MvPrecision::Quarter];

    pub fn name(self) -> &'static str {
        match self {
            MvPrecision::Integer => "integer",
            MvPrecision::Half => "half",
            MvPrecision::Quarter => "quarter",
        }
    }
}

/// Rectangle of the current frame being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Region {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Region { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }
}

impl From<&BlockNode> for Region {
    fn from(n: &BlockNode) -> Self {
        Region::new(n.x, n.y, n.w, n.h)
    }
}

/// Reference frame padded by edge replication so that every integer
/// candidate within the search range reads in-bounds memory.
pub(crate) struct PaddedRef {
    pad: usize,
    stride: usize,
    data: Vec<u8>,
}

impl PaddedRef {
    pub(crate) fn new(reference: &Picture, pad: usize) -> Self {
        let (w, h) = reference.dims();
        let stride = w + 2 * pad;
        let rows = h + 2 * pad;
        let mut data = Vec::with_capacity(stride * rows);
        for py in 0..rows {
            let sy = (py as isize - pad as isize).clamp(0, h as isize - 1) as usize;
            let row = reference.row(sy);
            data.extend(std::iter::repeat_n(row[0], pad));
            data.extend_from_slice(row);
            data.extend(std::iter::repeat_n(row[w - 1], pad));
        }
        PaddedRef { pad, stride, data }
    }

    #[inline]
    fn row(&self, x: isize, y: isize, w: usize) -> &[u8] {
        let px = (x + self.pad as isize) as usize;
        let py = (y + self.pad as isize) as usize;
        let start = py * self.stride + px;
        &self.data[start..start + w]
    }
}

#[inline]
fn row_sad(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).map(|(&p, &q)| (p as i32 - q as i32).unsigned_abs()).sum::<u32>() as u64
}

/// SAD between a region of `cur` and a contiguous `w * h` prediction block.
pub fn block_sad(cur: &Picture, region: Region, pred: &[u8]) -> u64 {
    (0..region.h)
        .map(|r| {
            let c = &cur.row(region.y + r)[region.x..region.x + region.w];
            row_sad(c, &pred[r * region.w..(r + 1) * region.w])
        })
        .sum()
}

/// Ordering key: lower SAD, then shorter vector, then smaller `dy`, then smaller `dx`.
#[inline]
fn better(sad: u64, dx: i32, dy: i32, best: (u64, i32, i32)) -> bool {
    let (bs, bdx, bdy) = best;
    (sad, dx.abs() + dy.abs(), dy, dx) < (bs, bdx.abs() + bdy.abs(), bdy, bdx)
}

pub(crate) fn integer_search(padded: &PaddedRef, cur: &Picture, region: Region, range: i32) -> (QuarterPelMv, u64) {
    let mut best = (u64::MAX, 0i32, 0i32);
    for dy in -range..=range {
        for dx in -range..=range {
            let mut sad = 0u64;
            let mut pruned = false;
            for r in 0..region.h {
                let c = &cur.row(region.y + r)[region.x..region.x + region.w];
                let p = padded.row(region.x as isize + dx as isize, (region.y + r) as isize + dy as isize, region.w);
                sad += row_sad(c, p);
                if sad > best.0 {
                    pruned = true;
                    break;
                }
            }
            if !pruned && better(sad, dx, dy, best) {
                best = (sad, dx, dy);
            }
        }
    }
    (QuarterPelMv::from_pixels(best.1, best.2), best.0)
}

fn check_region(cur: &Picture, region: Region) -> Result<()> {
    if region.w == 0 || region.h == 0 || region.x + region.w > cur.width() || region.y + region.h > cur.height() {
        return Err(Error::Bounds {
            x: region.x,
            y: region.y,
            w: region.w,
            h: region.h,
            width: cur.width(),
            height: cur.height(),
        });
    }
    Ok(())
}

/// Exhaustive whole-pixel search over `[-range, range]^2`.
///
/// Returns the best vector (quarter-pel units, multiples of 4) and its SAD.
pub fn estimate_motion_integer(
    reference: &Picture,
    cur: &Picture,
    region: Region,
    range: usize,
) -> Result<(QuarterPelMv, u64)> {
    check_region(cur, region)?;
    if reference.dims() != cur.dims() {
        return Err(Error::param("reference and current frame differ in size"));
    }
    let padded = PaddedRef::new(reference, range);
    Ok(integer_search(&padded, cur, region, range as i32))
}

/// Refine a whole-pixel vector to `precision`, returning the vector and its SAD.
///
/// The eight neighbours at half-pel spacing are tried first, then the eight
/// at quarter-pel spacing around the half-pel winner. A candidate replaces
/// the current best only on strictly lower SAD; candidates beyond
/// `4 * range` on either axis are ignored.
pub fn refine_qpel(
    reference: &Picture,
    cur: &Picture,
    region: Region,
    mv_int: QuarterPelMv,
    range: usize,
    precision: MvPrecision,
) -> Result<(QuarterPelMv, u64)> {
    check_region(cur, region)?;
    if !mv_int.is_integer() {
        return Err(Error::param(format!("refinement must start from a whole-pixel vector, got {mv_int}")));
    }
    let mut buf = vec![0u8; region.area()];
    let mut sad_of = |mv: QuarterPelMv| -> u64 {
        qpel_fetch_into(reference, region.x as isize, region.y as isize, region.w, region.h, mv, &mut buf)
            .expect("region checked above");
        block_sad(cur, region, &buf)
    };
    let mut best = mv_int;
    let mut best_sad = sad_of(best);
    let limit = 4 * range as i32;
    let steps: &[i32] = match precision {
        MvPrecision::Integer => &[],
        MvPrecision::Half => &[2],
        MvPrecision::Quarter => &[2, 1],
    };
    for &step in steps {
        if best_sad == 0 {
            break;
        }
        let centre = best;
        for oy in -1..=1 {
            for ox in -1..=1 {
                if ox == 0 && oy == 0 {
                    continue;
                }
                let cand = QuarterPelMv::new(centre.dx + ox * step, centre.dy + oy * step);
                if cand.dx.abs() > limit || cand.dy.abs() > limit {
                    continue;
                }
                let s = sad_of(cand);
                if s < best_sad {
                    best = cand;
                    best_sad = s;
                }
            }
        }
    }
    Ok((best, best_sad))
}
