//! Binary container for per-frame syntax elements.
//!
//! Little-endian layout:
//!
//! ```text
//! header  "FSTX" u16 version=1, u16 flags, u32 width, u32 height,
//!         u32 frame_count, u8 residual_mode, u8 deadzone, 6 reserved bytes
//! frame   u32 frame_index, u32 leaf_count
//!   leaf  u16 x, u16 y, u8 w_code, u8 h_code, i16 dx_qpel, i16 dy_qpel,
//!         u8 skip, u8 mode
//!   then, for each non-skip leaf in order, w*h i16 residual samples row-major
//! ```
//!
//! A size code `c` decodes to `min(1 << c, frame_extent - origin)`, which
//! covers both full power-of-two blocks and blocks clipped at the right or
//! bottom border. Skip leaves store no residual samples.

use std::fs;
use std::path::Path;

use crate::encoder::ResidualMode;
use crate::error::{Error, Result};
use crate::model::{BlockMode, BlockNode, BlockPartition, FrameSyntax, QuarterPelMv};
use crate::plane::Residual;

pub const MAGIC: &[u8; 4] = b"FSTX";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;
const LEAF_LEN: usize = 12;

/// A syntax stream together with its stream-level parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Sidecar {
    pub width: usize,
    pub height: usize,
    pub residual_mode: ResidualMode,
    pub deadzone: u8,
    pub frames: Vec<FrameSyntax>,
}

fn size_code(origin: usize, size: usize, extent: usize) -> Result<u8> {
    (0u8..16)
        .find(|&c| (1usize << c).min(extent - origin) == size)
        .ok_or_else(|| Error::Logic(format!("block extent {size} at {origin} has no size code")))
}

fn code_size(code: u8, origin: usize, extent: usize) -> Option<usize> {
    if code >= 16 || origin >= extent {
        return None;
    }
    Some((1usize << code).min(extent - origin))
}

impl Sidecar {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.width > u16::MAX as usize || self.height > u16::MAX as usize {
            return Err(Error::param("sidecar frames are limited to 65535 samples per side"));
        }
        let leaves: usize = self.frames.iter().map(|f| f.partition.len()).sum();
        let mut out = Vec::with_capacity(HEADER_LEN + self.frames.len() * 8 + leaves * LEAF_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.extend_from_slice(&(self.frames.len() as u32).to_le_bytes());
        out.push(self.residual_mode.code());
        out.push(self.deadzone);
        out.extend_from_slice(&[0u8; 6]);

        for frame in &self.frames {
            if frame.dims() != (self.width, self.height) {
                return Err(Error::param(format!(
                    "frame {} is {}x{}, stream is {}x{}",
                    frame.frame_index,
                    frame.dims().0,
                    frame.dims().1,
                    self.width,
                    self.height
                )));
            }
            let leaves = frame.partition.leaves();
            out.extend_from_slice(&(frame.frame_index as u32).to_le_bytes());
            out.extend_from_slice(&(leaves.len() as u32).to_le_bytes());
            for leaf in leaves {
                let dx = i16::try_from(leaf.mv.dx).map_err(|_| Error::param("motion vector exceeds i16"))?;
                let dy = i16::try_from(leaf.mv.dy).map_err(|_| Error::param("motion vector exceeds i16"))?;
                out.extend_from_slice(&(leaf.x as u16).to_le_bytes());
                out.extend_from_slice(&(leaf.y as u16).to_le_bytes());
                out.push(size_code(leaf.x, leaf.w, self.width)?);
                out.push(size_code(leaf.y, leaf.h, self.height)?);
                out.extend_from_slice(&dx.to_le_bytes());
                out.extend_from_slice(&dy.to_le_bytes());
                out.push(leaf.skip as u8);
                out.push(leaf.mode.code());
            }
            for leaf in leaves.iter().filter(|l| !l.skip) {
                for y in leaf.y..leaf.y + leaf.h {
                    for &r in &frame.residual.row(y)[leaf.x..leaf.x + leaf.w] {
                        out.extend_from_slice(&r.to_le_bytes());
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut rd = Reader { buf, pos: 0 };
        let magic = rd.take(4)?;
        if magic != MAGIC {
            return Err(Error::format(0, "bad magic, expected FSTX"));
        }
        let version = rd.u16()?;
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        let _flags = rd.u16()?;
        let width = rd.u32()? as usize;
        let height = rd.u32()? as usize;
        let frame_count = rd.u32()? as usize;
        let mode_at = rd.pos;
        let residual_mode = ResidualMode::from_code(rd.u8()?)
            .ok_or_else(|| Error::format(mode_at as u64, "unknown residual mode"))?;
        let deadzone = rd.u8()?;
        rd.take(6)?;
        if frame_count > 0 && (width == 0 || height == 0 || width > u16::MAX as usize || height > u16::MAX as usize) {
            return Err(Error::format(8, format!("invalid frame size {width}x{height}")));
        }

        let mut frames = Vec::with_capacity(frame_count.min(1 << 16));
        for _ in 0..frame_count {
            let frame_at = rd.pos as u64;
            let frame_index = rd.u32()? as usize;
            let leaf_count = rd.u32()? as usize;
            if leaf_count > width * height {
                return Err(Error::format(frame_at + 4, format!("leaf count {leaf_count} exceeds pixel count")));
            }
            let mut leaves = Vec::with_capacity(leaf_count);
            for _ in 0..leaf_count {
                let leaf_at = rd.pos as u64;
                let x = rd.u16()? as usize;
                let y = rd.u16()? as usize;
                let wc = rd.u8()?;
                let hc = rd.u8()?;
                let dx = rd.i16()? as i32;
                let dy = rd.i16()? as i32;
                let skip = match rd.u8()? {
                    0 => false,
                    1 => true,
                    v => return Err(Error::format(leaf_at + 10, format!("skip flag {v} is not 0 or 1"))),
                };
                let mode =
                    BlockMode::from_code(rd.u8()?).ok_or_else(|| Error::format(leaf_at + 11, "unknown block mode"))?;
                let (Some(w), Some(h)) = (code_size(wc, x, width), code_size(hc, y, height)) else {
                    return Err(Error::format(leaf_at, format!("leaf at ({x}, {y}) lies outside the frame")));
                };
                let mut leaf = BlockNode::new(x, y, w, h);
                leaf.mv = QuarterPelMv::new(dx, dy);
                leaf.skip = skip;
                leaf.mode = mode;
                leaves.push(leaf);
            }
            let partition = BlockPartition::new(width, height, leaves)
                .map_err(|e| Error::format(frame_at, format!("invalid partition: {e}")))?;

            let mut residual = vec![0i16; width * height];
            for leaf in partition.leaves().iter().filter(|l| !l.skip) {
                for y in leaf.y..leaf.y + leaf.h {
                    for x in leaf.x..leaf.x + leaf.w {
                        let at = rd.pos as u64;
                        let v = rd.i16()?;
                        if !(-255..=255).contains(&v) {
                            return Err(Error::format(at, format!("residual sample {v} out of range")));
                        }
                        residual[y * width + x] = v;
                    }
                }
            }
            let residual = Residual::from_vec(width, height, residual)?;
            let syntax = FrameSyntax::new(frame_index, partition, residual)
                .map_err(|e| Error::format(frame_at, e.to_string()))?;
            frames.push(syntax);
        }
        if rd.pos != buf.len() {
            return Err(Error::format(rd.pos as u64, "trailing bytes after last frame"));
        }
        Ok(Sidecar {
            width,
            height,
            residual_mode,
            deadzone,
            frames,
        })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(self.buf.len() as u64, "unexpected end of data"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn i16(&mut self) -> Result<i16> {
        Ok(i16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn write_sidecar(path: impl AsRef<Path>, sidecar: &Sidecar) -> Result<()> {
    fs::write(path, sidecar.to_bytes()?)?;
    Ok(())
}

pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Sidecar> {
    Sidecar::from_bytes(&fs::read(path)?)
}
