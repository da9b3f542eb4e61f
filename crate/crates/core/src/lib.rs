//! Accelerated video super-resolution by transferring one frame's
//! super-resolved output to the following frames through codec syntax
//! elements: quarter-pel motion vectors, prediction residuals, block
//! partitions and skip flags.
//!
//! The pipeline for a chained group of pictures:
//!
//! 1. [`encoder`] produces a block quadtree, motion vectors and residuals
//!    for every frame against its predecessor (standing in for a decoder
//!    that exposes them).
//! 2. [`sr`] super-resolves the group's first frame.
//! 3. [`transfer`] reconstructs each following high-resolution frame from
//!    its predecessor, falling back to bicubic upsampling on blocks with
//!    large residuals.
//! 4. [`deblock`] smooths the artificial edges left at block boundaries.
//!
//! [`eval`] measures quality and speed against per-frame super-resolution.

pub mod deblock;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod model;
pub mod pgm;
pub mod pipeline;
pub mod plane;
pub mod sampling;
pub mod sr;
pub mod synth;
pub mod transfer;

pub use deblock::{compute_boundary_strength, deblock_frame, DeblockConfig};
pub use encoder::{
    decode_frame, decode_sequence, encode_frame, encode_sequence, EncoderConfig, MvPrecision, ResidualMode, Sidecar,
};
pub use error::{Error, Result};
pub use model::{block_region_view, BlockMode, BlockNode, BlockPartition, FrameSyntax, GopConfig, QuarterPelMv};
pub use pipeline::{upscale_sequence, UpscaleConfig};
pub use plane::{Picture, Plane, PlaneView, Residual, Sample};
pub use sampling::{bicubic_downsample, bicubic_upsample, qpel_fetch_block, CubicKernel};
pub use sr::{apply_sr, SrKind, SrOperator};
pub use transfer::{transfer_block, transfer_frame, TransferConfig, TransferOutput, TransferStats};
