//! Learning the residual threshold that separates transferred blocks from
//! bicubic-fallback blocks.

use rayon::prelude::*;

use super::{transfer_frame, TransferConfig};
use crate::encoder::{encode_frame, EncoderConfig};
use crate::error::{Error, Result};
use crate::eval::psnr_samples;
use crate::plane::Picture;
use crate::sampling::{bicubic_downsample, bicubic_upsample};

/// PSNR assigned to exact matches so that objectives stay finite.
pub const PSNR_CAP: f64 = 100.0;

/// One block's residual magnitude and the PSNR of each reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingBlock {
    /// Mean absolute residual of the block.
    pub e: f64,
    /// PSNR of the transferred block against ground truth.
    pub y_transfer: f64,
    /// PSNR of the bicubic block against ground truth.
    pub y_bicubic: f64,
}

/// Summed PSNR when blocks with `e <= eta` are transferred and the rest use bicubic.
pub fn threshold_objective(blocks: &[TrainingBlock], eta: f64) -> f64 {
    blocks
        .iter()
        .map(|b| if b.e <= eta { b.y_transfer } else { b.y_bicubic })
        .sum()
}

/// The threshold maximising [`threshold_objective`].
///
/// Candidates are 0, the midpoints between consecutive distinct `e` values,
/// and one past the largest `e`; ties go to the smaller threshold.
pub fn learn_threshold(blocks: &[TrainingBlock]) -> Result<f64> {
    if blocks.is_empty() {
        return Err(Error::param("threshold learning needs at least one block"));
    }
    for b in blocks {
        if b.e < 0.0 || !b.e.is_finite() || !b.y_transfer.is_finite() || !b.y_bicubic.is_finite() {
            return Err(Error::param(format!("invalid training block {b:?}")));
        }
    }
    let mut es: Vec<f64> = blocks.iter().map(|b| b.e).collect();
    es.sort_by(f64::total_cmp);
    es.dedup();

    let mut candidates = Vec::with_capacity(es.len() + 1);
    candidates.push(0.0);
    candidates.extend(es.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    candidates.push(es[es.len() - 1] + 1.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|&eta| threshold_objective(blocks, eta))
        .collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(candidates[best])
}

/// Build training tuples from pairs of high-resolution frames.
///
/// Each pair is downsampled and encoded; every block of the second frame is
/// then reconstructed by transfer from the first frame's ground truth and by
/// bicubic upsampling, and both are scored against the second frame's ground
/// truth.
pub fn collect_training_blocks(
    hr_pairs: &[(Picture, Picture)],
    alpha: usize,
    encoder_cfg: &EncoderConfig,
) -> Result<Vec<TrainingBlock>> {
    if hr_pairs.is_empty() {
        return Err(Error::param("threshold training needs at least one frame pair"));
    }
    let cfg = TransferConfig {
        alpha,
        adaptive: false,
        ..TransferConfig::default()
    };
    let mut out = Vec::new();
    for (i, (hr1, hr2)) in hr_pairs.iter().enumerate() {
        let block = || -> Result<Vec<TrainingBlock>> {
            if hr1.dims() != hr2.dims() {
                return Err(Error::param("frame pair differs in size"));
            }
            let lr1 = bicubic_downsample(hr1, alpha)?;
            let lr2 = bicubic_downsample(hr2, alpha)?;
            let (syntax, recon) = encode_frame(&lr1, &lr2, encoder_cfg, 1)?;
            let transferred = transfer_frame(hr1, &recon, &syntax, &cfg)?.frame;
            let bicubic = bicubic_upsample(&recon, alpha)?;
            let mut blocks = Vec::with_capacity(syntax.partition.len());
            for leaf in syntax.partition.leaves() {
                let (x, y, w, h) = (leaf.x * alpha, leaf.y * alpha, leaf.w * alpha, leaf.h * alpha);
                let gt = hr2.region(x, y, w, h)?.to_plane();
                let t = transferred.region(x, y, w, h)?.to_plane();
                let b = bicubic.region(x, y, w, h)?.to_plane();
                blocks.push(TrainingBlock {
                    e: leaf.mean_abs_residual,
                    y_transfer: psnr_samples(t.data(), gt.data()),
                    y_bicubic: psnr_samples(b.data(), gt.data()),
                });
            }
            Ok(blocks)
        };
        out.extend(block().map_err(|e| e.at_frame(i))?);
    }
    Ok(out)
}
