//! `fastsr`: accelerate single-image super-resolution on video by
//! transferring keyframe output along codec syntax elements.

mod plugin;
mod video;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fastsr_core::encoder::sidecar::{read_sidecar, write_sidecar};
use fastsr_core::eval::{
    report_csv, run_deblock_ablation, run_mv_accuracy_sweep, run_prepared_experiment, stats_csv, ExperimentConfig,
    ExperimentReport, PreparedClip,
};
use fastsr_core::model::BLOCK_SIZES;
use fastsr_core::pipeline::check_syntax;
use fastsr_core::synth::mixed_motion_clip;
use fastsr_core::{
    decode_sequence, encode_sequence, upscale_sequence, DeblockConfig, EncoderConfig, FrameSyntax, GopConfig,
    MvPrecision, ResidualMode, Sidecar, SrKind, SrOperator, TransferConfig, UpscaleConfig,
};

use crate::plugin::PluginMethod;
use crate::video::{read_video, upscale_chroma, write_video, Frame, FrameFormat, Video};

#[derive(Parser, Debug)]
#[command(name = "fastsr", version, about)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a low-resolution video and write its syntax elements to a sidecar.
    Extract {
        /// Y4M file or directory of PGM/PNG frames.
        input: PathBuf,
        /// Sidecar file to write.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        encoder: EncoderArgs,
    },
    /// Upscale a low-resolution video: SR on keyframes, transfer elsewhere.
    Upscale {
        /// Y4M file or directory of PGM/PNG frames.
        input: PathBuf,
        /// Output: a .y4m file, or a directory of frames.
        #[arg(short, long)]
        output: PathBuf,
        /// Syntax elements from `extract`; encoded inline when absent.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        encoder: EncoderArgs,
        /// Frame format when writing a directory.
        #[arg(long, value_enum, default_value_t = FrameFormat::Pgm)]
        frame_format: FrameFormat,
    },
    /// Compare per-frame SR with transfer on a high-resolution clip and write CSV.
    Bench {
        /// Ground-truth Y4M file or frame directory (luma is used).
        input: Option<PathBuf>,
        /// Use a generated mixed-motion clip instead of an input file.
        #[arg(long, conflicts_with = "input")]
        synthetic: bool,
        /// Size and length of the generated clip.
        #[arg(long, default_value_t = 352)]
        width: usize,
        #[arg(long, default_value_t = 288)]
        height: usize,
        #[arg(long, default_value_t = 16)]
        frames: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Per-frame CSV; printed to stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Block statistics CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Run once per GOP length, e.g. 1,2,4,8,16; writes one CSV each.
        #[arg(long, value_delimiter = ',')]
        sweep_gop: Vec<usize>,
        /// Print the motion-vector accuracy table for the first two frames.
        #[arg(long)]
        mv_sweep: bool,
        /// Print per-frame PSNR with and without deblocking.
        #[arg(long)]
        ablation: bool,
        /// Timed repetitions per step; the median is reported.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        encoder: EncoderArgs,
    },
    /// Reference SR plugin: PGM on stdin, upscaled PGM on stdout.
    SrPlugin {
        #[arg(long)]
        scale: usize,
        #[arg(long, value_enum, default_value_t = PluginMethod::Bicubic)]
        method: PluginMethod,
        /// Sleep this long before answering, to emulate a heavy model.
        #[arg(long, default_value_t = 0)]
        delay_ms: u64,
    },
}

#[derive(Args, Debug, Clone)]
struct EncoderArgs {
    /// Whole-pixel motion search range.
    #[arg(long, default_value_t = 16)]
    search_range: usize,
    /// Split a block while its SAD per pixel exceeds this.
    #[arg(long, default_value_t = 5.0)]
    split_threshold: f64,
    #[arg(long, default_value_t = 8)]
    min_block: usize,
    #[arg(long, default_value_t = 64)]
    max_block: usize,
    #[arg(long, value_enum, default_value_t = ResidualArg::Lossless)]
    residual_mode: ResidualArg,
    /// Residuals with magnitude up to this are dropped in deadzone mode.
    #[arg(long, default_value_t = 2)]
    deadzone: u8,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Quarter)]
    mv_precision: PrecisionArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ResidualArg {
    Lossless,
    Deadzone,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Integer,
    Half,
    Quarter,
}

impl EncoderArgs {
    fn config(&self) -> EncoderConfig {
        EncoderConfig {
            search_range: self.search_range,
            max_block: self.max_block,
            min_block: self.min_block,
            split_threshold: self.split_threshold,
            residual_mode: match self.residual_mode {
                ResidualArg::Lossless => ResidualMode::Lossless,
                ResidualArg::Deadzone => ResidualMode::Deadzone,
            },
            deadzone: self.deadzone,
            precision: match self.mv_precision {
                PrecisionArg::Integer => MvPrecision::Integer,
                PrecisionArg::Half => MvPrecision::Half,
                PrecisionArg::Quarter => MvPrecision::Quarter,
            },
        }
    }
}

#[derive(Args, Debug, Clone)]
struct PipelineArgs {
    /// Scale factor (2, 3 or 4).
    #[arg(long, default_value_t = 2)]
    alpha: usize,
    /// Keyframe SR operator: bicubic, ibp or external:<command>.
    #[arg(long, default_value = "ibp")]
    sr: SrKind,
    /// Frames per group of pictures; the first of each is super-resolved.
    #[arg(long, default_value_t = 16)]
    gop: usize,
    /// Mean absolute residual above which a block falls back to bicubic.
    #[arg(long, default_value_t = 10.0)]
    eta: f64,
    /// Transfer every block regardless of its residual.
    #[arg(long)]
    no_adaptive: bool,
    /// Skip the zero-vector and zero-residual shortcuts (same output, slower).
    #[arg(long)]
    no_shortcuts: bool,
    #[arg(long)]
    no_deblock: bool,
    /// Deblocking activity threshold.
    #[arg(long, default_value_t = 24)]
    beta: i32,
    /// Deblocking clipping threshold.
    #[arg(long, default_value_t = 6)]
    tc: i32,
}

impl PipelineArgs {
    fn sr(&self) -> fastsr_core::Result<SrOperator> {
        SrOperator::new(self.sr.clone(), self.alpha)
    }

    fn transfer(&self) -> TransferConfig {
        TransferConfig {
            alpha: self.alpha,
            eta: self.eta,
            adaptive: !self.no_adaptive,
            shortcuts: !self.no_shortcuts,
        }
    }

    fn deblock(&self) -> DeblockConfig {
        DeblockConfig {
            beta: self.beta,
            tc: self.tc,
            enabled: !self.no_deblock,
        }
    }

    fn upscale(&self) -> fastsr_core::Result<UpscaleConfig> {
        let sr = self.sr()?;
        Ok(UpscaleConfig {
            gop: GopConfig::new(self.gop)?,
            sr,
            transfer: self.transfer(),
            deblock: self.deblock(),
        })
    }

    fn experiment(&self, encoder: EncoderConfig, repeats: usize) -> fastsr_core::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.sr()?);
        cfg.gop = GopConfig::new(self.gop)?;
        cfg.transfer = self.transfer();
        cfg.deblock = self.deblock();
        cfg.encoder = encoder;
        cfg.timing_repeats = repeats;
        Ok(cfg)
    }
}

/// A failure with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_PLUGIN: u8 = 4;

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    fn data(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_DATA,
            error: error.into(),
        }
    }
}

impl From<fastsr_core::Error> for Failure {
    fn from(e: fastsr_core::Error) -> Self {
        use fastsr_core::Error as E;
        let code = match e.root() {
            E::Plugin { .. } => EXIT_PLUGIN,
            E::Format { .. } | E::Logic(_) => EXIT_DATA,
            _ => EXIT_USAGE,
        };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        match error.downcast::<fastsr_core::Error>() {
            Ok(e) => e.into(),
            Err(error) => Failure::usage(error),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)?;
        if let Some(fastsr_core::Error::Plugin { stderr, .. }) = self.error.downcast_ref::<fastsr_core::Error>().map(|e| e.root()) {
            if !stderr.trim().is_empty() {
                write!(f, "\nplugin stderr:\n{}", stderr.trim_end())?;
            }
        }
        Ok(())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Extract { input, output, encoder } => cmd_extract(&input, &output, &encoder.config()),
        Command::Upscale {
            input,
            output,
            sidecar,
            pipeline,
            encoder,
            frame_format,
        } => cmd_upscale(&input, &output, sidecar.as_deref(), &pipeline, &encoder.config(), frame_format),
        Command::Bench {
            input,
            synthetic,
            width,
            height,
            frames,
            seed,
            output,
            stats,
            sweep_gop,
            mv_sweep,
            ablation,
            repeats,
            pipeline,
            encoder,
        } => {
            let source = match (input, synthetic) {
                (Some(path), _) => Source::File(path),
                (None, true) => Source::Synthetic {
                    width,
                    height,
                    frames,
                    seed,
                },
                (None, false) => exit_with(Failure::usage(anyhow::anyhow!("bench needs an input or --synthetic"))),
            };
            let opts = BenchOptions {
                output,
                stats,
                sweep_gop,
                mv_sweep,
                ablation,
                repeats,
            };
            cmd_bench(source, &opts, &pipeline, &encoder.config())
        }
        Command::SrPlugin {
            scale,
            method,
            delay_ms,
        } => plugin::run(method, scale, delay_ms).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => exit_with(f),
    }
}

fn exit_with(f: Failure) -> ! {
    eprintln!("error: {f}");
    std::process::exit(f.code as i32)
}

fn cmd_extract(input: &Path, output: &Path, cfg: &EncoderConfig) -> CmdResult {
    let video = read_video(input).map_err(Failure::usage)?;
    cfg.validate()?;
    let luma = video.luma();
    let (syntax, _) = encode_sequence(&luma, cfg)?;
    let (width, height) = video.dims();
    let sidecar = Sidecar {
        width,
        height,
        residual_mode: cfg.residual_mode,
        deadzone: cfg.deadzone,
        frames: syntax,
    };
    write_sidecar(output, &sidecar)?;
    print!("{}", syntax_summary(&sidecar.frames));
    Ok(())
}

/// Block-size histogram and skip/zero-vector shares of a syntax stream.
fn syntax_summary(frames: &[FrameSyntax]) -> String {
    let mut leaves = [0usize; 4];
    let mut pixels = [0usize; 4];
    let (mut total, mut skip, mut zero_mv) = (0usize, 0usize, 0usize);
    for f in frames {
        for l in f.partition.leaves() {
            let class = BLOCK_SIZES.iter().position(|&s| s == l.size_class()).unwrap_or(0);
            leaves[class] += 1;
            pixels[class] += l.area();
            total += l.area();
            skip += if l.skip { l.area() } else { 0 };
            zero_mv += if l.mv.is_zero() { l.area() } else { 0 };
        }
    }
    let share = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
    let mut s = format!("frames with syntax: {}\nblock_size,leaves,pixel_share\n", frames.len());
    for (i, size) in BLOCK_SIZES.iter().enumerate() {
        s += &format!("{size},{},{:.4}\n", leaves[i], share(pixels[i]));
    }
    s += &format!("skip_fraction,{:.4}\nzero_mv_fraction,{:.4}\n", share(skip), share(zero_mv));
    s
}

fn cmd_upscale(
    input: &Path,
    output: &Path,
    sidecar: Option<&Path>,
    pipeline: &PipelineArgs,
    encoder: &EncoderConfig,
    format: FrameFormat,
) -> CmdResult {
    let video = read_video(input).map_err(Failure::usage)?;
    let cfg = pipeline.upscale()?;
    cfg.transfer.validate()?;
    let luma = video.luma();

    let (decoded, syntax) = match sidecar {
        Some(path) => {
            if !path.exists() {
                return Err(Failure::usage(anyhow::anyhow!("sidecar {} does not exist", path.display())));
            }
            let sc = read_sidecar(path)?;
            if (sc.width, sc.height) != video.dims() {
                return Err(Failure::data(anyhow::anyhow!(
                    "sidecar is for {}x{} frames, input is {}x{}",
                    sc.width,
                    sc.height,
                    video.dims().0,
                    video.dims().1
                )));
            }
            check_syntax(&luma, &sc.frames)?;
            (decode_sequence(&luma[0], &sc.frames)?, sc.frames)
        }
        None => {
            let (syntax, recon) = encode_sequence(&luma, encoder)?;
            (recon, syntax)
        }
    };

    let (hr, stats) = upscale_sequence(&decoded, &syntax, &cfg)?;
    log::info!(
        "{} frames, {} blocks transferred, {} fell back to bicubic",
        hr.len(),
        stats.blocks_transferred,
        stats.blocks_fallback
    );
    let alpha = pipeline.alpha;
    let frames = hr
        .into_iter()
        .zip(&video.frames)
        .map(|(luma, src)| {
            let (w, h) = luma.dims();
            let chroma = match &src.chroma {
                Some((u, v)) => Some((upscale_chroma(u, alpha, w, h)?, upscale_chroma(v, alpha, w, h)?)),
                None => None,
            };
            Ok(Frame { luma, chroma })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let out = Video {
        frames,
        rate: video.rate.clone(),
    };
    write_video(output, &out, format).map_err(Failure::usage)?;
    Ok(())
}

enum Source {
    File(PathBuf),
    Synthetic {
        width: usize,
        height: usize,
        frames: usize,
        seed: u64,
    },
}

struct BenchOptions {
    output: Option<PathBuf>,
    stats: Option<PathBuf>,
    sweep_gop: Vec<usize>,
    mv_sweep: bool,
    ablation: bool,
    repeats: usize,
}

fn cmd_bench(source: Source, opts: &BenchOptions, pipeline: &PipelineArgs, encoder: &EncoderConfig) -> CmdResult {
    let hr = match source {
        Source::File(path) => read_video(&path).map_err(Failure::usage)?.luma(),
        Source::Synthetic {
            width,
            height,
            frames,
            seed,
        } => {
            if width < 16 || height < 16 || frames < 2 {
                return Err(Failure::usage(anyhow::anyhow!(
                    "synthetic clips need at least 16x16 pixels and 2 frames"
                )));
            }
            mixed_motion_clip(width, height, frames, seed)
        }
    };
    if hr.len() < 2 {
        return Err(Failure::usage(anyhow::anyhow!("bench needs at least two frames")));
    }
    let cfg = pipeline.experiment(encoder.clone(), opts.repeats)?;

    if opts.mv_sweep {
        let rows = run_mv_accuracy_sweep((&hr[0], &hr[1]), &cfg.sr)?;
        let mut table = String::from("precision,psnr\n");
        for (p, db) in rows {
            table += &format!("{},{db}\n", p.name());
        }
        emit(opts.output.as_deref(), &table)?;
        return Ok(());
    }
    if opts.ablation {
        let rows = run_deblock_ablation(&hr, &cfg)?;
        let mut table = String::from("frame,psnr_with,psnr_without\n");
        for r in rows {
            table += &format!("{},{},{}\n", r.frame_index, r.psnr_with, r.psnr_without);
        }
        emit(opts.output.as_deref(), &table)?;
        return Ok(());
    }

    let clip = PreparedClip::new(&hr, cfg.alpha(), &cfg.encoder)?;
    if opts.sweep_gop.is_empty() {
        let report = run_prepared_experiment(&clip, &cfg)?;
        summarize(&report);
        emit(opts.output.as_deref(), &report_csv(&report))?;
        if let Some(path) = &opts.stats {
            write_file(path, &stats_csv(&report))?;
        }
        return Ok(());
    }
    for &gop in &opts.sweep_gop {
        let mut cfg = cfg.clone();
        cfg.gop = GopConfig::new(gop)?;
        let report = run_prepared_experiment(&clip, &cfg)?;
        summarize(&report);
        match &opts.output {
            Some(path) => write_file(&suffixed(path, &format!("gop{gop}")), &report_csv(&report))?,
            None => print!("# gop {gop}\n{}", report_csv(&report)),
        }
        if let Some(path) = &opts.stats {
            write_file(&suffixed(path, &format!("gop{gop}")), &stats_csv(&report))?;
        }
    }
    Ok(())
}

fn summarize(r: &ExperimentReport) {
    eprintln!(
        "gop {}: psnr bicubic {:.3} dB, sr {:.3} dB, fast {:.3} dB, speedup {:.2}x",
        r.gop_length,
        r.mean_psnr_bicubic(),
        r.mean_psnr_sr(),
        r.mean_psnr_fast(),
        r.speedup
    );
}

/// `dir/name.csv` with `tag` appended to the stem: `dir/name_tag.csv`.
fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::usage(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
