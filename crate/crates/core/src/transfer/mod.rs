//! Super-resolution transfer.
//!
//! Each block of the current high-resolution frame is the previous
//! high-resolution frame, motion-compensated with the block's vector scaled
//! by `alpha`, plus the bicubically upsampled low-resolution residual:
//!
//! ```text
//! hr_cur[alpha * p] = hr_prev[alpha * (p + mv)] + bicubic(residual[p])
//! ```
//!
//! Blocks whose mean absolute residual exceeds `eta` are instead cropped from
//! a bicubic upsampling of the current low-resolution frame. Zero-vector
//! blocks copy pixels directly and skip blocks never touch their residual.

mod threshold;

pub use threshold::{collect_training_blocks, learn_threshold, threshold_objective, TrainingBlock, PSNR_CAP};

use std::ops::AddAssign;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{block_region_view, size_class_index, BlockMode, BlockNode, BlockPartition, FrameSyntax};
use crate::plane::{Picture, Residual, Sample};
use crate::sampling::{bicubic_upsample, qpel_fetch_into, SCALE_FACTORS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferConfig {
    pub alpha: usize,
    /// Mean absolute residual above which a block falls back to bicubic.
    pub eta: f64,
    pub adaptive: bool,
    /// Zero-vector copy and skip-block shortcuts. They change timing only.
    pub shortcuts: bool,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            alpha: 2,
            eta: 10.0,
            adaptive: true,
            shortcuts: true,
        }
    }
}

impl TransferConfig {
    pub fn with_alpha(alpha: usize) -> Self {
        TransferConfig {
            alpha,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !SCALE_FACTORS.contains(&self.alpha) {
            return Err(Error::param(format!("scale factor must be 2, 3 or 4, got {}", self.alpha)));
        }
        if self.eta.is_nan() || self.eta < 0.0 {
            return Err(Error::param(format!("eta must be non-negative, got {}", self.eta)));
        }
        Ok(())
    }

    /// Decide whether `leaf` is transferred or upsampled directly.
    pub fn block_mode(&self, leaf: &BlockNode) -> BlockMode {
        if self.adaptive && leaf.mean_abs_residual > self.eta {
            BlockMode::BicubicFallback
        } else {
            BlockMode::Transfer
        }
    }
}

/// Counters describing how a frame (or sequence) was transferred.
///
/// Pixel counts are in low-resolution pixels. Histograms are indexed by
/// block size class 8, 16, 32, 64.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransferStats {
    pub blocks_transferred: usize,
    pub blocks_fallback: usize,
    pub pixels_zero_mv: usize,
    pub pixels_zero_residual: usize,
    pub pixels_total: usize,
    pub hist_total: [usize; 4],
    pub hist_zero_mv: [usize; 4],
    pub hist_zero_residual: [usize; 4],
}

impl TransferStats {
    fn record(&mut self, leaf: &BlockNode, mode: BlockMode) {
        match mode {
            BlockMode::Transfer => self.blocks_transferred += 1,
            BlockMode::BicubicFallback => self.blocks_fallback += 1,
        }
        let area = leaf.area();
        let class = size_class_index(leaf.size_class());
        self.pixels_total += area;
        self.hist_total[class] += area;
        if leaf.mv.is_zero() {
            self.pixels_zero_mv += area;
            self.hist_zero_mv[class] += area;
        }
        if leaf.skip {
            self.pixels_zero_residual += area;
            self.hist_zero_residual[class] += area;
        }
    }

    pub fn zero_mv_fraction(&self) -> f64 {
        ratio(self.pixels_zero_mv, self.pixels_total)
    }

    pub fn zero_residual_fraction(&self) -> f64 {
        ratio(self.pixels_zero_residual, self.pixels_total)
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

impl AddAssign for TransferStats {
    fn add_assign(&mut self, o: Self) {
        self.blocks_transferred += o.blocks_transferred;
        self.blocks_fallback += o.blocks_fallback;
        self.pixels_zero_mv += o.pixels_zero_mv;
        self.pixels_zero_residual += o.pixels_zero_residual;
        self.pixels_total += o.pixels_total;
        for i in 0..4 {
            self.hist_total[i] += o.hist_total[i];
            self.hist_zero_mv[i] += o.hist_zero_mv[i];
            self.hist_zero_residual[i] += o.hist_zero_residual[i];
        }
    }
}

/// Result of transferring one frame.
#[derive(Debug, Clone)]
pub struct TransferOutput {
    /// High-resolution frame before deblocking.
    pub frame: Picture,
    pub stats: TransferStats,
    /// The frame's partition with each leaf's chosen mode filled in.
    pub partition: BlockPartition,
}

/// Produce the high-resolution samples of one block, row-major
/// `alpha * leaf.w` wide.
///
/// `bicubic_hr_cur` is the bicubic upsampling of the current low-resolution
/// frame; it is only read for fallback blocks.
pub fn transfer_block(
    prev_hr: &Picture,
    leaf: &BlockNode,
    residual: &Residual,
    bicubic_hr_cur: Option<&Picture>,
    cfg: &TransferConfig,
) -> Result<(Vec<u8>, BlockMode)> {
    cfg.validate()?;
    let a = cfg.alpha;
    let (hx, hy, hw, hh) = (leaf.x * a, leaf.y * a, leaf.w * a, leaf.h * a);
    if prev_hr.dims() != (residual.width() * a, residual.height() * a) {
        return Err(Error::param(format!(
            "previous frame is {}x{}, expected {}x{}",
            prev_hr.width(),
            prev_hr.height(),
            residual.width() * a,
            residual.height() * a
        )));
    }
    let res_view = block_region_view(residual, leaf)?;

    let mode = cfg.block_mode(leaf);
    if mode == BlockMode::BicubicFallback {
        let up = bicubic_hr_cur.ok_or_else(|| Error::Logic("fallback block without a bicubic frame".into()))?;
        if up.dims() != prev_hr.dims() {
            return Err(Error::param("bicubic frame does not match the high-resolution size"));
        }
        let view = up.region(hx, hy, hw, hh)?;
        let mut out = Vec::with_capacity(hw * hh);
        for row in view.rows() {
            out.extend_from_slice(row);
        }
        return Ok((out, mode));
    }

    let mut out = vec![0u8; hw * hh];
    if cfg.shortcuts && leaf.mv.is_zero() {
        let view = prev_hr.region(hx, hy, hw, hh)?;
        for (dst, src) in out.chunks_exact_mut(hw).zip(view.rows()) {
            dst.copy_from_slice(src);
        }
    } else {
        let hr_mv = leaf.mv.scaled(a as i32);
        qpel_fetch_into(prev_hr, hx as isize, hy as isize, hw, hh, hr_mv, &mut out)?;
    }

    if !(cfg.shortcuts && leaf.skip) {
        let up = bicubic_upsample(&res_view.to_plane(), a)?;
        for (o, &r) in out.iter_mut().zip(up.data()) {
            *o = u8::clamp_i32(*o as i32 + r as i32);
        }
    }
    Ok((out, mode))
}

/// Transfer `prev_hr` onto the current frame using its syntax elements.
pub fn transfer_frame(
    prev_hr: &Picture,
    cur_lr: &Picture,
    syntax: &FrameSyntax,
    cfg: &TransferConfig,
) -> Result<TransferOutput> {
    cfg.validate()?;
    let a = cfg.alpha;
    let (w, h) = cur_lr.dims();
    if syntax.dims() != (w, h) {
        return Err(Error::param(format!(
            "syntax is {}x{}, frame is {w}x{h}",
            syntax.dims().0,
            syntax.dims().1
        )));
    }
    if prev_hr.dims() != (w * a, h * a) {
        return Err(Error::param(format!(
            "previous frame is {}x{}, expected {}x{}",
            prev_hr.width(),
            prev_hr.height(),
            w * a,
            h * a
        )));
    }

    let leaves = syntax.partition.leaves();
    let needs_fallback = leaves.iter().any(|l| cfg.block_mode(l) == BlockMode::BicubicFallback);
    let bicubic = if needs_fallback {
        Some(bicubic_upsample(cur_lr, a)?)
    } else {
        None
    };

    let blocks: Vec<(Vec<u8>, BlockMode)> = leaves
        .par_iter()
        .map(|leaf| transfer_block(prev_hr, leaf, &syntax.residual, bicubic.as_ref(), cfg))
        .collect::<Result<_>>()?;

    let mut frame = Picture::new(w * a, h * a)?;
    let mut stats = TransferStats::default();
    let mut partition = syntax.partition.clone();
    for (leaf, (block, mode)) in partition.leaves_mut().iter_mut().zip(blocks) {
        frame.write_block(leaf.x * a, leaf.y * a, leaf.w * a, &block)?;
        leaf.mode = mode;
        stats.record(leaf, mode);
    }
    Ok(TransferOutput {
        frame,
        stats,
        partition,
    })
}
