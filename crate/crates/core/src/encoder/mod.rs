//! A small predictive encoder producing the syntax elements the transfer
//! engine consumes: a block quadtree, quarter-pel motion vectors, residuals
//! and skip flags.

mod motion;
mod quadtree;
pub mod sidecar;

pub use motion::{block_sad, estimate_motion_integer, refine_qpel, MvPrecision, Region};
pub use quadtree::build_quadtree;
pub use sidecar::{read_sidecar, write_sidecar, Sidecar};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BlockPartition, FrameSyntax};
use crate::plane::{Picture, Residual, Sample};
use crate::sampling::qpel_fetch_into;

/// How residuals are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ResidualMode {
    /// Residuals stored exactly; reconstruction equals the input.
    #[default]
    Lossless,
    /// Residual values with magnitude at most `deadzone` are zeroed.
    Deadzone,
}

impl ResidualMode {
    pub fn code(self) -> u8 {
        match self {
            ResidualMode::Lossless => 0,
            ResidualMode::Deadzone => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ResidualMode::Lossless),
            1 => Some(ResidualMode::Deadzone),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    /// Whole-pixel search range on each axis.
    pub search_range: usize,
    pub max_block: usize,
    pub min_block: usize,
    /// A block splits when its best SAD per pixel exceeds this.
    pub split_threshold: f64,
    pub residual_mode: ResidualMode,
    pub deadzone: u8,
    pub precision: MvPrecision,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            search_range: 16,
            max_block: 64,
            min_block: 8,
            split_threshold: 5.0,
            residual_mode: ResidualMode::Lossless,
            deadzone: 2,
            precision: MvPrecision::Quarter,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        let pow2 = |v: usize| v.is_power_of_two();
        if !pow2(self.min_block) || !pow2(self.max_block) || self.min_block > self.max_block {
            return Err(Error::param(format!(
                "block sizes must be powers of two with min <= max, got {}..{}",
                self.min_block, self.max_block
            )));
        }
        if self.max_block > crate::model::SUPERBLOCK || self.min_block < 1 {
            return Err(Error::param("max block size cannot exceed 64"));
        }
        if self.search_range == 0 {
            return Err(Error::param("search range must be positive"));
        }
        if self.split_threshold.is_nan() || self.split_threshold < 0.0 {
            return Err(Error::param("split threshold must be non-negative"));
        }
        Ok(())
    }
}

/// Motion-compensated prediction of a whole frame from `reference`.
pub fn predict_frame(reference: &Picture, partition: &BlockPartition) -> Result<Picture> {
    let mut pred = Picture::new(partition.frame_width(), partition.frame_height())?;
    let blocks: Vec<Vec<u8>> = partition
        .leaves()
        .par_iter()
        .map(|leaf| {
            let mut buf = vec![0u8; leaf.area()];
            qpel_fetch_into(reference, leaf.x as isize, leaf.y as isize, leaf.w, leaf.h, leaf.mv, &mut buf)?;
            Ok(buf)
        })
        .collect::<Result<_>>()?;
    for (leaf, block) in partition.leaves().iter().zip(&blocks) {
        pred.write_block(leaf.x, leaf.y, leaf.w, block)?;
    }
    Ok(pred)
}

/// Encode `cur` against `reference`, returning its syntax and the
/// decoder-side reconstruction.
pub fn encode_frame(
    reference: &Picture,
    cur: &Picture,
    cfg: &EncoderConfig,
    frame_index: usize,
) -> Result<(FrameSyntax, Picture)> {
    if reference.dims() != cur.dims() {
        return Err(Error::param(format!(
            "reference is {}x{}, current frame is {}x{}",
            reference.width(),
            reference.height(),
            cur.width(),
            cur.height()
        )));
    }
    let mut partition = build_quadtree(reference, cur, cfg)?;
    let pred = predict_frame(reference, &partition)?;
    let (w, h) = cur.dims();
    let dz = match cfg.residual_mode {
        ResidualMode::Lossless => 0,
        ResidualMode::Deadzone => cfg.deadzone as i32,
    };
    let residual: Vec<i16> = cur
        .data()
        .iter()
        .zip(pred.data())
        .map(|(&c, &p)| {
            let r = c as i32 - p as i32;
            if r.abs() <= dz {
                0
            } else {
                r as i16
            }
        })
        .collect();
    let residual = Residual::from_vec(w, h, residual)?;

    for leaf in partition.leaves_mut() {
        leaf.skip = (leaf.y..leaf.y + leaf.h).all(|y| residual.row(y)[leaf.x..leaf.x + leaf.w].iter().all(|&r| r == 0));
    }
    let recon = reconstruct(&pred, &residual)?;
    let syntax = FrameSyntax::new(frame_index, partition, residual)?;
    Ok((syntax, recon))
}

fn reconstruct(pred: &Picture, residual: &Residual) -> Result<Picture> {
    let data = pred
        .data()
        .iter()
        .zip(residual.data())
        .map(|(&p, &r)| u8::clamp_i32(p as i32 + r as i32))
        .collect();
    Picture::from_vec(pred.width(), pred.height(), data)
}

/// Rebuild a frame from its reference and syntax elements, as a decoder would.
pub fn decode_frame(reference: &Picture, syntax: &FrameSyntax) -> Result<Picture> {
    if reference.dims() != syntax.dims() {
        return Err(Error::param("reference and syntax differ in size"));
    }
    let pred = predict_frame(reference, &syntax.partition)?;
    reconstruct(&pred, &syntax.residual)
}

/// Encode every frame after the first against its reconstructed predecessor.
///
/// Returns the syntax of frames `1..n` and the reconstructions of all `n`
/// frames (frame 0 passes through unchanged).
pub fn encode_sequence(frames: &[Picture], cfg: &EncoderConfig) -> Result<(Vec<FrameSyntax>, Vec<Picture>)> {
    cfg.validate()?;
    let Some(first) = frames.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let mut recon = vec![first.clone()];
    let mut syntax = Vec::with_capacity(frames.len().saturating_sub(1));
    for (i, cur) in frames.iter().enumerate().skip(1) {
        let (s, r) = encode_frame(&recon[i - 1], cur, cfg, i).map_err(|e| e.at_frame(i))?;
        log::debug!("encoded frame {i}: {} leaves", s.partition.len());
        syntax.push(s);
        recon.push(r);
    }
    Ok((syntax, recon))
}

/// Reconstruct a sequence from its first frame and the syntax of the rest.
pub fn decode_sequence(first: &Picture, syntax: &[FrameSyntax]) -> Result<Vec<Picture>> {
    let mut out = vec![first.clone()];
    for s in syntax {
        let prev = out.last().expect("non-empty");
        let f = decode_frame(prev, s).map_err(|e| e.at_frame(s.frame_index))?;
        out.push(f);
    }
    Ok(out)
}
