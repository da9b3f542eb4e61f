//! Video input and output: Y4M (4:2:0 or mono, 8-bit) files and directories
//! of grayscale PGM/PNG frames.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use fastsr_core::pgm::{decode_pgm, encode_pgm};
use fastsr_core::{bicubic_upsample, Picture};

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub luma: Picture,
    /// Cb and Cr planes at half resolution, rounded up.
    pub chroma: Option<(Picture, Picture)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub frames: Vec<Frame>,
    /// Frame-rate token of a Y4M source, reused on output.
    pub rate: String,
}

impl Video {
    pub fn from_luma(frames: Vec<Picture>) -> Self {
        Video {
            frames: frames.into_iter().map(|luma| Frame { luma, chroma: None }).collect(),
            rate: "F25:1".into(),
        }
    }

    pub fn luma(&self) -> Vec<Picture> {
        self.frames.iter().map(|f| f.luma.clone()).collect()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames.first().map_or((0, 0), |f| f.luma.dims())
    }
}

/// Frame format used when writing a directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FrameFormat {
    Pgm,
    Png,
}

fn is_y4m(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("y4m"))
}

/// Read a Y4M file or a directory of frames. Errors here are input errors.
pub fn read_video(path: &Path) -> Result<Video> {
    let video = if !path.exists() {
        bail!("{} does not exist", path.display());
    } else if path.is_dir() {
        read_frame_dir(path)?
    } else if is_y4m(path) {
        let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        read_y4m(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?
    } else {
        bail!("{}: expected a .y4m file or a directory of .pgm/.png frames", path.display());
    };
    if video.frames.is_empty() {
        bail!("{} contains no frames", path.display());
    }
    if let Some(f) = video.frames.iter().position(|f| f.luma.dims() != video.dims()) {
        bail!("{}: frame {f} differs in size from frame 0", path.display());
    }
    Ok(video)
}

pub fn read_y4m(mut r: impl BufRead) -> Result<Video> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut tokens = header.trim_end_matches('\n').split(' ');
    if tokens.next() != Some("YUV4MPEG2") {
        bail!("not a YUV4MPEG2 stream");
    }
    let (mut w, mut h, mut rate, mut colour) = (0usize, 0usize, "F25:1".to_string(), "420jpeg".to_string());
    for t in tokens.filter(|t| !t.is_empty()) {
        let (tag, val) = t.split_at(1);
        match tag {
            "W" => w = val.parse().context("bad width")?,
            "H" => h = val.parse().context("bad height")?,
            "F" => rate = t.to_string(),
            "C" => colour = val.to_string(),
            _ => {}
        }
    }
    if w == 0 || h == 0 {
        bail!("missing or zero frame size in header");
    }
    let mono = match colour.as_str() {
        "420jpeg" | "420paldv" | "420mpeg2" | "420" => false,
        "mono" => true,
        other => bail!("unsupported colour space C{other}; only 8-bit 4:2:0 and mono are supported"),
    };
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    let mut frames = Vec::new();
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            break;
        }
        if !line.starts_with("FRAME") {
            bail!("frame {}: expected FRAME marker", frames.len());
        }
        let mut plane = |pw: usize, ph: usize| -> Result<Picture> {
            let mut buf = vec![0u8; pw * ph];
            r.read_exact(&mut buf).with_context(|| format!("frame {} is truncated", frames.len()))?;
            Ok(Picture::from_vec(pw, ph, buf)?)
        };
        let luma = plane(w, h)?;
        let chroma = if mono { None } else { Some((plane(cw, ch)?, plane(cw, ch)?)) };
        frames.push(Frame { luma, chroma });
    }
    Ok(Video { frames, rate })
}

pub fn write_y4m(mut out: impl Write, video: &Video) -> Result<()> {
    let (w, h) = video.dims();
    let with_chroma = video.frames.iter().all(|f| f.chroma.is_some());
    let colour = if with_chroma { "C420jpeg" } else { "Cmono" };
    writeln!(out, "YUV4MPEG2 W{w} H{h} {} Ip A1:1 {colour}", video.rate)?;
    for f in &video.frames {
        out.write_all(b"FRAME\n")?;
        out.write_all(f.luma.data())?;
        if let (true, Some((u, v))) = (with_chroma, &f.chroma) {
            out.write_all(u.data())?;
            out.write_all(v.data())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_frame_dir(dir: &Path) -> Result<Video> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
        })
        .collect();
    paths.sort();
    let frames = paths
        .iter()
        .map(|p| read_frame(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Video::from_luma(frames))
}

fn read_frame(path: &Path) -> Result<Picture> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        return Ok(decode_pgm(&fs::read(path)?)?);
    }
    let img = image::open(path)?.to_luma8();
    let (w, h) = img.dimensions();
    Ok(Picture::from_vec(w as usize, h as usize, img.into_raw())?)
}

/// Write to `path`: a Y4M file if it ends in `.y4m`, otherwise a directory
/// of numbered frames.
pub fn write_video(path: &Path, video: &Video, format: FrameFormat) -> Result<()> {
    if is_y4m(path) {
        let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        return write_y4m(BufWriter::new(file), video);
    }
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))?;
    for (i, f) in video.frames.iter().enumerate() {
        let (w, h) = f.luma.dims();
        match format {
            FrameFormat::Pgm => fs::write(path.join(format!("frame_{i:05}.pgm")), encode_pgm(&f.luma))?,
            FrameFormat::Png => image::save_buffer(
                path.join(format!("frame_{i:05}.png")),
                f.luma.data(),
                w as u32,
                h as u32,
                image::ExtendedColorType::L8,
            )
            .map_err(|e| anyhow!("writing frame {i}: {e}"))?,
        }
    }
    Ok(())
}

/// Upscale chroma planes by `alpha` for an output luma of `luma_w` x `luma_h`.
pub fn upscale_chroma(plane: &Picture, alpha: usize, luma_w: usize, luma_h: usize) -> Result<Picture> {
    let up = bicubic_upsample(plane, alpha)?;
    Ok(up.region(0, 0, luma_w.div_ceil(2), luma_h.div_ceil(2))?.to_plane())
}
