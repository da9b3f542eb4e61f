//! Chained-GOP upscaling of a decoded sequence.

use crate::deblock::{deblock_frame, DeblockConfig};
use crate::error::{Error, Result};
use crate::model::{FrameSyntax, GopConfig};
use crate::plane::Picture;
use crate::sr::SrOperator;
use crate::transfer::{transfer_frame, TransferConfig, TransferStats};

#[derive(Debug, Clone)]
pub struct UpscaleConfig {
    pub gop: GopConfig,
    pub sr: SrOperator,
    pub transfer: TransferConfig,
    pub deblock: DeblockConfig,
}

impl UpscaleConfig {
    pub fn new(sr: SrOperator) -> Self {
        UpscaleConfig {
            gop: GopConfig::default(),
            transfer: TransferConfig::with_alpha(sr.alpha),
            sr,
            deblock: DeblockConfig::default(),
        }
    }
}

/// Check that `syntax` describes frames `1..n` of `lr` in order.
pub fn check_syntax(lr: &[Picture], syntax: &[FrameSyntax]) -> Result<()> {
    if syntax.len() + 1 != lr.len().max(1) {
        return Err(Error::Logic(format!(
            "syntax covers {} frames, sequence has {} (expected one fewer)",
            syntax.len(),
            lr.len()
        )));
    }
    for (i, s) in syntax.iter().enumerate() {
        if s.frame_index != i + 1 {
            return Err(Error::Logic(format!("syntax entry {i} is for frame {}, expected {}", s.frame_index, i + 1)));
        }
        if s.dims() != lr[i + 1].dims() {
            return Err(Error::Logic(format!(
                "syntax of frame {} is {}x{}, frame is {}x{}",
                i + 1,
                s.dims().0,
                s.dims().1,
                lr[i + 1].width(),
                lr[i + 1].height()
            )));
        }
    }
    Ok(())
}

/// Super-resolve GOP keyframes and transfer every other frame from its
/// deblocked predecessor.
///
/// `lr` holds decoder-side frames and `syntax` the syntax of frames `1..n`.
pub fn upscale_sequence(
    lr: &[Picture],
    syntax: &[FrameSyntax],
    cfg: &UpscaleConfig,
) -> Result<(Vec<Picture>, TransferStats)> {
    if cfg.transfer.alpha != cfg.sr.alpha {
        return Err(Error::param("transfer and SR scale factors differ"));
    }
    check_syntax(lr, syntax)?;
    let mut out: Vec<Picture> = Vec::with_capacity(lr.len());
    let mut stats = TransferStats::default();
    for (i, cur) in lr.iter().enumerate() {
        let mut step = || -> Result<Picture> {
            if cfg.gop.is_keyframe(i) {
                return cfg.sr.apply(cur);
            }
            let t = transfer_frame(&out[i - 1], cur, &syntax[i - 1], &cfg.transfer)?;
            stats += t.stats;
            deblock_frame(&t.frame, &t.partition, cfg.transfer.alpha, &cfg.deblock)
        };
        let hr = step().map_err(|e| e.at_frame(i))?;
        log::debug!("frame {i} upscaled");
        out.push(hr);
    }
    Ok((out, stats))
}
