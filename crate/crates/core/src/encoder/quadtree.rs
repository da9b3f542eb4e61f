use rayon::prelude::*;

use super::motion::{integer_search, refine_qpel, PaddedRef, Region};
use super::EncoderConfig;
use crate::error::{Error, Result};
use crate::model::{BlockNode, BlockPartition};
use crate::plane::Picture;

struct Search<'a> {
    reference: &'a Picture,
    padded: PaddedRef,
    cur: &'a Picture,
    cfg: &'a EncoderConfig,
}

impl Search<'_> {
    fn node(&self, x: usize, y: usize, size: usize, out: &mut Vec<BlockNode>) -> Result<()> {
        let (fw, fh) = self.cur.dims();
        let region = Region::new(x, y, size.min(fw - x), size.min(fh - y));
        let range = self.cfg.search_range;
        let (mv_int, _) = integer_search(&self.padded, self.cur, region, range as i32);
        let (mv, sad) = refine_qpel(self.reference, self.cur, region, mv_int, range, self.cfg.precision)?;

        let per_pixel = sad as f64 / region.area() as f64;
        if per_pixel > self.cfg.split_threshold && size > self.cfg.min_block {
            let half = size / 2;
            for (cx, cy) in [(x, y), (x + half, y), (x, y + half), (x + half, y + half)] {
                if cx < fw && cy < fh {
                    self.node(cx, cy, half, out)?;
                }
            }
        } else {
            let mut leaf = BlockNode::new(region.x, region.y, region.w, region.h);
            leaf.mv = mv;
            out.push(leaf);
        }
        Ok(())
    }
}

/// Partition `cur` into motion-compensated blocks.
///
/// Each superblock (clipped at the frame border) is motion-searched at its
/// current size and split into quadrants while its SAD per pixel exceeds
/// `cfg.split_threshold` and it is larger than `cfg.min_block`. Leaves are
/// returned in depth-first order, superblocks in raster order.
pub fn build_quadtree(reference: &Picture, cur: &Picture, cfg: &EncoderConfig) -> Result<BlockPartition> {
    cfg.validate()?;
    if reference.dims() != cur.dims() {
        return Err(Error::param("reference and current frame differ in size"));
    }
    let search = Search {
        reference,
        padded: PaddedRef::new(reference, cfg.search_range),
        cur,
        cfg,
    };
    let (fw, fh) = cur.dims();
    let sb = cfg.max_block;
    let origins: Vec<(usize, usize)> = (0..fh)
        .step_by(sb)
        .flat_map(|y| (0..fw).step_by(sb).map(move |x| (x, y)))
        .collect();
    let groups: Vec<Vec<BlockNode>> = origins
        .par_iter()
        .map(|&(x, y)| {
            let mut leaves = Vec::new();
            search.node(x, y, sb, &mut leaves)?;
            Ok(leaves)
        })
        .collect::<Result<_>>()?;
    BlockPartition::new(fw, fh, groups.into_iter().flatten().collect())
}
