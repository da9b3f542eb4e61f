//! Chained-GOP experiments comparing per-frame super-resolution with transfer.

use std::time::Instant;

use crate::deblock::{deblock_frame, DeblockConfig};
use crate::encoder::{encode_frame, encode_sequence, EncoderConfig, MvPrecision};
use crate::error::{Error, Result};
use crate::eval::psnr;
use crate::model::{FrameSyntax, GopConfig};
use crate::plane::Picture;
use crate::sampling::{bicubic_downsample, bicubic_upsample};
use crate::sr::SrOperator;
use crate::transfer::{transfer_frame, TransferConfig, TransferStats};

/// Everything a chained experiment needs besides the frames.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub gop: GopConfig,
    pub sr: SrOperator,
    pub transfer: TransferConfig,
    pub deblock: DeblockConfig,
    pub encoder: EncoderConfig,
    /// Each timed step runs this many times; the median is reported.
    pub timing_repeats: usize,
}

impl ExperimentConfig {
    pub fn new(sr: SrOperator) -> Self {
        let transfer = TransferConfig::with_alpha(sr.alpha);
        ExperimentConfig {
            gop: GopConfig::default(),
            sr,
            transfer,
            deblock: DeblockConfig::default(),
            encoder: EncoderConfig::default(),
            timing_repeats: 3,
        }
    }

    pub fn alpha(&self) -> usize {
        self.sr.alpha
    }
}

/// Per-frame measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRecord {
    pub frame_index: usize,
    pub keyframe: bool,
    pub psnr_bicubic: f64,
    pub psnr_sr: f64,
    pub psnr_fast: f64,
    pub t_sr_ms: f64,
    pub t_transfer_ms: f64,
    pub t_deblock_ms: f64,
}

/// Mean PSNRs over a prefix of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Averages {
    pub frames: usize,
    pub psnr_bicubic: f64,
    pub psnr_sr: f64,
    pub psnr_fast: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub gop_length: usize,
    pub records: Vec<FrameRecord>,
    pub avg4: Averages,
    pub avg16: Averages,
    /// Per-frame SR time over keyframe SR plus transfer and deblocking time.
    pub speedup: f64,
    pub stats: TransferStats,
}

impl ExperimentReport {
    pub fn from_records(gop_length: usize, records: Vec<FrameRecord>, stats: TransferStats) -> Self {
        let avg4 = averages(&records, 4);
        let avg16 = averages(&records, 16);
        let speedup = speedup(&records);
        ExperimentReport {
            gop_length,
            records,
            avg4,
            avg16,
            speedup,
            stats,
        }
    }

    /// Mean of `psnr_sr - psnr_fast` over all frames.
    pub fn mean_fast_loss(&self) -> f64 {
        mean(self.records.iter().map(|r| r.psnr_sr - r.psnr_fast))
    }

    pub fn mean_psnr_fast(&self) -> f64 {
        mean(self.records.iter().map(|r| r.psnr_fast))
    }

    pub fn mean_psnr_sr(&self) -> f64 {
        mean(self.records.iter().map(|r| r.psnr_sr))
    }

    pub fn mean_psnr_bicubic(&self) -> f64 {
        mean(self.records.iter().map(|r| r.psnr_bicubic))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Averages over the first `n` records (fewer if the sequence is shorter).
pub fn averages(records: &[FrameRecord], n: usize) -> Averages {
    let head = &records[..n.min(records.len())];
    Averages {
        frames: head.len(),
        psnr_bicubic: mean(head.iter().map(|r| r.psnr_bicubic)),
        psnr_sr: mean(head.iter().map(|r| r.psnr_sr)),
        psnr_fast: mean(head.iter().map(|r| r.psnr_fast)),
    }
}

/// Speedup implied by the timing columns.
pub fn speedup(records: &[FrameRecord]) -> f64 {
    let per_frame: f64 = records.iter().map(|r| r.t_sr_ms).sum();
    let fast: f64 = records
        .iter()
        .map(|r| {
            if r.keyframe {
                r.t_sr_ms
            } else {
                r.t_transfer_ms + r.t_deblock_ms
            }
        })
        .sum();
    if fast > 0.0 {
        per_frame / fast
    } else {
        1.0
    }
}

/// Run `f` `repeats` times and return its last result with the median time in ms.
fn timed<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut out = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        out = Some(f()?);
        times.push(t.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    Ok((out.expect("ran at least once"), times[times.len() / 2]))
}

/// Crop a frame so both dimensions are multiples of `alpha`.
pub fn crop_to_multiple(p: &Picture, alpha: usize) -> Result<Picture> {
    let w = p.width() - p.width() % alpha;
    let h = p.height() - p.height() % alpha;
    if w == 0 || h == 0 {
        return Err(Error::param(format!("frame {}x{} is smaller than the scale factor", p.width(), p.height())));
    }
    Ok(p.region(0, 0, w, h)?.to_plane())
}

/// Ground truth, decoded low-resolution frames and syntax for a clip.
#[derive(Debug, Clone)]
pub struct PreparedClip {
    pub hr: Vec<Picture>,
    /// Decoder-side low-resolution frames.
    pub lr: Vec<Picture>,
    /// Syntax of frames `1..n`.
    pub syntax: Vec<FrameSyntax>,
}

impl PreparedClip {
    /// Crop, downsample and encode a high-resolution clip.
    pub fn new(hr_frames: &[Picture], alpha: usize, encoder: &EncoderConfig) -> Result<Self> {
        if hr_frames.len() < 2 {
            return Err(Error::param("an experiment needs at least two frames"));
        }
        let hr = hr_frames
            .iter()
            .enumerate()
            .map(|(i, f)| crop_to_multiple(f, alpha).map_err(|e| e.at_frame(i)))
            .collect::<Result<Vec<_>>>()?;
        if hr.iter().any(|f| f.dims() != hr[0].dims()) {
            return Err(Error::param("frames differ in size"));
        }
        let lr = hr
            .iter()
            .enumerate()
            .map(|(i, f)| bicubic_downsample(f, alpha).map_err(|e| e.at_frame(i)))
            .collect::<Result<Vec<_>>>()?;
        let (syntax, decoded) = encode_sequence(&lr, encoder)?;
        Ok(PreparedClip {
            hr,
            lr: decoded,
            syntax,
        })
    }
}

/// Output of per-frame super-resolution.
struct SrArm {
    frames: Vec<Picture>,
    times: Vec<f64>,
}

fn run_sr_arm(clip: &PreparedClip, sr: &SrOperator, repeats: usize) -> Result<SrArm> {
    // warm-up, excluded from timing
    sr.apply(&clip.lr[0]).map_err(|e| e.at_frame(0))?;
    let mut frames = Vec::with_capacity(clip.lr.len());
    let mut times = Vec::with_capacity(clip.lr.len());
    for (i, lr) in clip.lr.iter().enumerate() {
        let (f, t) = timed(repeats, || sr.apply(lr)).map_err(|e| e.at_frame(i))?;
        frames.push(f);
        times.push(t);
    }
    Ok(SrArm { frames, times })
}

struct FastArm {
    frames: Vec<Picture>,
    t_transfer: Vec<f64>,
    t_deblock: Vec<f64>,
    stats: TransferStats,
}

fn run_fast_arm(
    clip: &PreparedClip,
    sr_frames: &[Picture],
    gop: &GopConfig,
    transfer: &TransferConfig,
    deblock: &DeblockConfig,
    repeats: usize,
) -> Result<FastArm> {
    let n = clip.lr.len();
    let mut frames: Vec<Picture> = Vec::with_capacity(n);
    let mut t_transfer = vec![0.0; n];
    let mut t_deblock = vec![0.0; n];
    let mut stats = TransferStats::default();
    for i in 0..n {
        if gop.is_keyframe(i) {
            frames.push(sr_frames[i].clone());
            continue;
        }
        let mut step = || -> Result<Picture> {
            let prev = &frames[i - 1];
            let syntax = &clip.syntax[i - 1];
            let (out, t) = timed(repeats, || transfer_frame(prev, &clip.lr[i], syntax, transfer))?;
            t_transfer[i] = t;
            stats += out.stats;
            let (hr, t) = timed(repeats, || deblock_frame(&out.frame, &out.partition, transfer.alpha, deblock))?;
            t_deblock[i] = t;
            Ok(hr)
        };
        let hr = step().map_err(|e| e.at_frame(i))?;
        frames.push(hr);
    }
    Ok(FastArm {
        frames,
        t_transfer,
        t_deblock,
        stats,
    })
}

/// Compare per-frame SR (arm A) with keyframe SR plus transfer (arm B).
///
/// Frames are cropped to a multiple of the scale factor, downsampled and
/// encoded as a chained sequence. Arm A super-resolves every decoded frame;
/// arm B super-resolves only GOP keyframes, reusing arm A's output for them,
/// and transfers and deblocks every other frame from its predecessor. All
/// outputs and the bicubic baseline are scored against the original frames.
pub fn run_chained_experiment(hr_frames: &[Picture], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let clip = PreparedClip::new(hr_frames, cfg.alpha(), &cfg.encoder)?;
    run_prepared_experiment(&clip, cfg)
}

/// [`run_chained_experiment`] on an already prepared clip.
pub fn run_prepared_experiment(clip: &PreparedClip, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.transfer.alpha != cfg.alpha() {
        return Err(Error::param("transfer and SR scale factors differ"));
    }
    let sr = run_sr_arm(clip, &cfg.sr, cfg.timing_repeats)?;
    let fast = run_fast_arm(clip, &sr.frames, &cfg.gop, &cfg.transfer, &cfg.deblock, cfg.timing_repeats)?;

    let mut records = Vec::with_capacity(clip.hr.len());
    for (i, gt) in clip.hr.iter().enumerate() {
        let bic = bicubic_upsample(&clip.lr[i], cfg.alpha())?;
        records.push(FrameRecord {
            frame_index: i,
            keyframe: cfg.gop.is_keyframe(i),
            psnr_bicubic: psnr(&bic, gt)?,
            psnr_sr: psnr(&sr.frames[i], gt)?,
            psnr_fast: psnr(&fast.frames[i], gt)?,
            t_sr_ms: sr.times[i],
            t_transfer_ms: fast.t_transfer[i],
            t_deblock_ms: fast.t_deblock[i],
        });
    }
    Ok(ExperimentReport::from_records(cfg.gop.gop_length, records, fast.stats))
}

/// One row of the deblocking ablation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationRow {
    pub frame_index: usize,
    pub psnr_with: f64,
    pub psnr_without: f64,
}

/// Transfer PSNR per frame with and without deblocking, everything else equal.
pub fn run_deblock_ablation(hr_frames: &[Picture], cfg: &ExperimentConfig) -> Result<Vec<AblationRow>> {
    let clip = PreparedClip::new(hr_frames, cfg.alpha(), &cfg.encoder)?;
    let keyframes: Vec<Picture> = clip
        .lr
        .iter()
        .enumerate()
        .map(|(i, lr)| {
            if cfg.gop.is_keyframe(i) {
                cfg.sr.apply(lr).map_err(|e| e.at_frame(i))
            } else {
                // never read by the fast arm
                Picture::new(1, 1)
            }
        })
        .collect::<Result<_>>()?;
    let on = DeblockConfig {
        enabled: true,
        ..cfg.deblock
    };
    let off = DeblockConfig::disabled();
    let with = run_fast_arm(&clip, &keyframes, &cfg.gop, &cfg.transfer, &on, 1)?;
    let without = run_fast_arm(&clip, &keyframes, &cfg.gop, &cfg.transfer, &off, 1)?;
    clip.hr
        .iter()
        .enumerate()
        .map(|(i, gt)| {
            Ok(AblationRow {
                frame_index: i,
                psnr_with: psnr(&with.frames[i], gt)?,
                psnr_without: psnr(&without.frames[i], gt)?,
            })
        })
        .collect()
}

/// Transfer PSNR of the second frame of a pair for each motion precision.
///
/// The first frame is super-resolved with `sr`; the second is transferred
/// without adaptive fallback or deblocking so that only vector accuracy
/// differs between rows. Rows are ordered integer, half, quarter.
pub fn run_mv_accuracy_sweep(hr_pair: (&Picture, &Picture), sr: &SrOperator) -> Result<Vec<(MvPrecision, f64)>> {
    let alpha = sr.alpha;
    let hr1 = crop_to_multiple(hr_pair.0, alpha)?;
    let hr2 = crop_to_multiple(hr_pair.1, alpha)?;
    if hr1.dims() != hr2.dims() {
        return Err(Error::param("frame pair differs in size"));
    }
    let lr1 = bicubic_downsample(&hr1, alpha)?;
    let lr2 = bicubic_downsample(&hr2, alpha)?;
    let sr1 = sr.apply(&lr1)?;
    let transfer = TransferConfig {
        alpha,
        adaptive: false,
        ..TransferConfig::default()
    };
    MvPrecision::ALL
        .iter()
        .map(|&precision| {
            let enc = EncoderConfig {
                precision,
                ..EncoderConfig::default()
            };
            let (syntax, recon) = encode_frame(&lr1, &lr2, &enc, 1)?;
            let out = transfer_frame(&sr1, &recon, &syntax, &transfer)?;
            Ok((precision, psnr(&out.frame, &hr2)?))
        })
        .collect()
}
