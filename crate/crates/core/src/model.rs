//! Syntax-element types shared by the encoder, the transfer engine and the
//! deblocking filter.

use std::fmt;

use crate::error::{Error, Result};
use crate::plane::{Plane, PlaneView, Residual, Sample};

/// Largest quadtree block edge; superblocks are this size before clipping.
pub const SUPERBLOCK: usize = 64;

/// Block edge sizes a partition may use away from frame borders.
pub const BLOCK_SIZES: [usize; 4] = [8, 16, 32, 64];

/// Motion vector in quarter-pixel units. Positive `dx` points right, positive `dy` down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct QuarterPelMv {
    pub dx: i32,
    pub dy: i32,
}

impl QuarterPelMv {
    pub const ZERO: QuarterPelMv = QuarterPelMv { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        QuarterPelMv { dx, dy }
    }

    /// Whole-pixel vector.
    pub const fn from_pixels(dx: i32, dy: i32) -> Self {
        QuarterPelMv { dx: dx * 4, dy: dy * 4 }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.dx == 0 && self.dy == 0
    }

    /// True when both components fall on whole pixels.
    #[inline]
    pub fn is_integer(self) -> bool {
        self.dx % 4 == 0 && self.dy % 4 == 0
    }

    /// Multiply both components, e.g. to carry a low-resolution vector to the
    /// high-resolution grid (still in quarter-pel units of that grid).
    pub fn scaled(self, factor: i32) -> Self {
        QuarterPelMv {
            dx: self.dx * factor,
            dy: self.dy * factor,
        }
    }
}

impl fmt::Display for QuarterPelMv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.dx, self.dy)
    }
}

/// How the transfer engine handled a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BlockMode {
    /// Motion-compensated copy of the previous high-resolution frame plus upsampled residual.
    #[default]
    Transfer,
    /// Plain bicubic upsampling of the current low-resolution block.
    BicubicFallback,
}

impl BlockMode {
    pub fn code(self) -> u8 {
        match self {
            BlockMode::Transfer => 0,
            BlockMode::BicubicFallback => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BlockMode::Transfer),
            1 => Some(BlockMode::BicubicFallback),
            _ => None,
        }
    }
}

/// Leaf of the block quadtree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockNode {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub mv: QuarterPelMv,
    /// Set when the stored residual over the block is identically zero.
    pub skip: bool,
    /// Mean of `|residual|` over the block.
    pub mean_abs_residual: f64,
    pub mode: BlockMode,
}

impl BlockNode {
    /// A transfer-mode leaf with zero motion and no residual information yet.
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        BlockNode {
            x,
            y,
            w,
            h,
            mv: QuarterPelMv::ZERO,
            skip: false,
            mean_abs_residual: 0.0,
            mode: BlockMode::Transfer,
        }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// The smallest standard block size that covers this block. Clipped border
    /// blocks report the size of the square they were clipped from.
    pub fn size_class(&self) -> usize {
        let m = self.w.max(self.h);
        BLOCK_SIZES.iter().copied().find(|&s| s >= m).unwrap_or(SUPERBLOCK)
    }

    /// True when the two blocks share part of an edge.
    pub fn is_adjacent(&self, other: &BlockNode) -> bool {
        let overlap_rows = self.y < other.y + other.h && other.y < self.y + self.h;
        let overlap_cols = self.x < other.x + other.w && other.x < self.x + self.w;
        let touch_h = self.x + self.w == other.x || other.x + other.w == self.x;
        let touch_v = self.y + self.h == other.y || other.y + other.h == self.y;
        (touch_h && overlap_rows) || (touch_v && overlap_cols)
    }
}

/// Borrow the region of `plane` covered by `node`.
pub fn block_region_view<'a, T: Sample>(plane: &'a Plane<T>, node: &BlockNode) -> Result<PlaneView<'a, T>> {
    plane.region(node.x, node.y, node.w, node.h)
}

/// Ordered set of leaves tiling a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    frame_width: usize,
    frame_height: usize,
    leaves: Vec<BlockNode>,
}

impl BlockPartition {
    /// Validate that `leaves` tile the frame exactly.
    pub fn new(frame_width: usize, frame_height: usize, leaves: Vec<BlockNode>) -> Result<Self> {
        if frame_width == 0 || frame_height == 0 {
            return Err(Error::param("partition frame dimensions must be positive"));
        }
        let mut covered = vec![false; frame_width * frame_height];
        let mut area = 0usize;
        for (i, leaf) in leaves.iter().enumerate() {
            if leaf.w == 0 || leaf.h == 0 || leaf.x + leaf.w > frame_width || leaf.y + leaf.h > frame_height {
                return Err(Error::Bounds {
                    x: leaf.x,
                    y: leaf.y,
                    w: leaf.w,
                    h: leaf.h,
                    width: frame_width,
                    height: frame_height,
                });
            }
            for y in leaf.y..leaf.y + leaf.h {
                for c in &mut covered[y * frame_width + leaf.x..y * frame_width + leaf.x + leaf.w] {
                    if *c {
                        return Err(Error::Logic(format!("leaf {i} overlaps an earlier leaf")));
                    }
                    *c = true;
                }
            }
            area += leaf.area();
        }
        if area != frame_width * frame_height {
            return Err(Error::Logic(format!(
                "leaves cover {area} of {} pixels",
                frame_width * frame_height
            )));
        }
        Ok(BlockPartition {
            frame_width,
            frame_height,
            leaves,
        })
    }

    /// A partition of plain superblocks (clipped at the borders), in raster order.
    pub fn uniform(frame_width: usize, frame_height: usize, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("block size must be positive"));
        }
        let mut leaves = Vec::new();
        for y in (0..frame_height).step_by(size) {
            for x in (0..frame_width).step_by(size) {
                leaves.push(BlockNode::new(
                    x,
                    y,
                    size.min(frame_width - x),
                    size.min(frame_height - y),
                ));
            }
        }
        BlockPartition::new(frame_width, frame_height, leaves)
    }

    pub fn frame_width(&self) -> usize {
        self.frame_width
    }

    pub fn frame_height(&self) -> usize {
        self.frame_height
    }

    pub fn leaves(&self) -> &[BlockNode] {
        &self.leaves
    }

    pub fn leaves_mut(&mut self) -> &mut [BlockNode] {
        &mut self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// Per-pixel index of the covering leaf, row-major over the frame.
    pub fn leaf_map(&self) -> Vec<u32> {
        let mut map = vec![0u32; self.frame_width * self.frame_height];
        for (i, leaf) in self.leaves.iter().enumerate() {
            for y in leaf.y..leaf.y + leaf.h {
                let row = y * self.frame_width;
                map[row + leaf.x..row + leaf.x + leaf.w].fill(i as u32);
            }
        }
        map
    }

    /// Pixel counts per size class, ordered as [`BLOCK_SIZES`].
    pub fn size_histogram(&self) -> [usize; 4] {
        let mut hist = [0usize; 4];
        for leaf in &self.leaves {
            hist[size_class_index(leaf.size_class())] += leaf.area();
        }
        hist
    }
}

pub(crate) fn size_class_index(size: usize) -> usize {
    BLOCK_SIZES.iter().position(|&s| s == size).unwrap_or(3)
}

/// Syntax elements of one predicted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSyntax {
    pub frame_index: usize,
    pub partition: BlockPartition,
    pub residual: Residual,
}

impl FrameSyntax {
    /// Assemble a frame's syntax, recomputing each leaf's mean absolute
    /// residual from `residual` and checking that skip leaves carry none.
    pub fn new(frame_index: usize, mut partition: BlockPartition, residual: Residual) -> Result<Self> {
        if residual.dims() != (partition.frame_width(), partition.frame_height()) {
            return Err(Error::param(format!(
                "residual is {}x{}, partition is {}x{}",
                residual.width(),
                residual.height(),
                partition.frame_width(),
                partition.frame_height()
            )));
        }
        for leaf in partition.leaves_mut() {
            let (sum, nonzero) = abs_sum(&residual, leaf);
            if leaf.skip && nonzero {
                return Err(Error::Logic(format!(
                    "skip leaf at ({}, {}) has nonzero residual",
                    leaf.x, leaf.y
                )));
            }
            leaf.mean_abs_residual = sum as f64 / leaf.area() as f64;
        }
        Ok(FrameSyntax {
            frame_index,
            partition,
            residual,
        })
    }

    /// Index of the frame this one is predicted from.
    pub fn reference_index(&self) -> Option<usize> {
        self.frame_index.checked_sub(1)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.residual.dims()
    }
}

fn abs_sum(residual: &Residual, leaf: &BlockNode) -> (u64, bool) {
    let mut sum = 0u64;
    for y in leaf.y..leaf.y + leaf.h {
        for &r in &residual.row(y)[leaf.x..leaf.x + leaf.w] {
            sum += r.unsigned_abs() as u64;
        }
    }
    (sum, sum != 0)
}

/// Group-of-pictures layout. Every frame is predicted from its predecessor;
/// the first frame of each group is super-resolved directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GopConfig {
    pub gop_length: usize,
}

impl GopConfig {
    pub fn new(gop_length: usize) -> Result<Self> {
        if gop_length == 0 {
            return Err(Error::param("gop length must be at least 1"));
        }
        Ok(GopConfig { gop_length })
    }

    pub fn is_keyframe(&self, frame_index: usize) -> bool {
        frame_index.is_multiple_of(self.gop_length)
    }
}

impl Default for GopConfig {
    fn default() -> Self {
        GopConfig { gop_length: 16 }
    }
}
