//! Single-image super-resolution operators applied to keyframes.
//!
//! Built in are bicubic upsampling and iterative back-projection. Any other
//! operator can be attached as an external process that reads a binary PGM
//! on stdin, is passed `--scale <alpha>`, and writes a binary PGM of exactly
//! `alpha` times the input size on stdout.

use std::fmt;
use std::io::Write;
use std::process::{Command, Stdio};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pgm::{decode_pgm, encode_pgm};
use crate::plane::Picture;
use crate::sampling::{bicubic_upsample, downsample_values, upsample_values, values_to_plane, SCALE_FACTORS};

/// Default back-projection iteration count.
pub const IBP_ITERATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum SrKind {
    Bicubic,
    /// Iterative back-projection starting from the bicubic estimate.
    Ibp { iterations: usize, step: f64 },
    /// Shell command implementing the PGM plugin protocol.
    External { command: String },
}

impl SrKind {
    pub fn ibp() -> Self {
        SrKind::Ibp {
            iterations: IBP_ITERATIONS,
            step: 1.0,
        }
    }
}

impl FromStr for SrKind {
    type Err = Error;

    /// Parses `bicubic`, `ibp` or `external:<command>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bicubic" => Ok(SrKind::Bicubic),
            "ibp" => Ok(SrKind::ibp()),
            _ => match s.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(SrKind::External {
                    command: cmd.to_string(),
                }),
                _ => Err(Error::param(format!(
                    "unknown SR operator {s:?}; expected bicubic, ibp or external:<command>"
                ))),
            },
        }
    }
}

impl fmt::Display for SrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrKind::Bicubic => f.write_str("bicubic"),
            SrKind::Ibp { .. } => f.write_str("ibp"),
            SrKind::External { command } => write!(f, "external:{command}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrOperator {
    pub kind: SrKind,
    pub alpha: usize,
}

impl SrOperator {
    pub fn new(kind: SrKind, alpha: usize) -> Result<Self> {
        if !SCALE_FACTORS.contains(&alpha) {
            return Err(Error::param(format!("scale factor must be 2, 3 or 4, got {alpha}")));
        }
        if let SrKind::Ibp { iterations, step } = kind {
            if iterations == 0 || step.is_nan() || step <= 0.0 {
                return Err(Error::param("back-projection needs at least one iteration and a positive step"));
            }
        }
        Ok(SrOperator { kind, alpha })
    }

    pub fn bicubic(alpha: usize) -> Result<Self> {
        SrOperator::new(SrKind::Bicubic, alpha)
    }

    pub fn ibp(alpha: usize) -> Result<Self> {
        SrOperator::new(SrKind::ibp(), alpha)
    }

    pub fn apply(&self, frame: &Picture) -> Result<Picture> {
        apply_sr(self, frame)
    }
}

/// Super-resolve `frame` by `op.alpha`.
pub fn apply_sr(op: &SrOperator, frame: &Picture) -> Result<Picture> {
    let out = match &op.kind {
        SrKind::Bicubic => bicubic_upsample(frame, op.alpha)?,
        SrKind::Ibp { iterations, step } => back_project(frame, op.alpha, *iterations, *step)?,
        SrKind::External { command } => run_external(command, frame, op.alpha)?,
    };
    if out.dims() != (frame.width() * op.alpha, frame.height() * op.alpha) {
        return Err(Error::Plugin {
            message: format!(
                "operator returned {}x{}, expected {}x{}",
                out.width(),
                out.height(),
                frame.width() * op.alpha,
                frame.height() * op.alpha
            ),
            stderr: String::new(),
        });
    }
    Ok(out)
}

fn back_project(frame: &Picture, alpha: usize, iterations: usize, step: f64) -> Result<Picture> {
    let (w, h) = frame.dims();
    let (hw, hh) = (w * alpha, h * alpha);
    let target: Vec<f64> = frame.data().iter().map(|&v| v as f64).collect();
    let mut est = upsample_values(&target, w, h, alpha)?;
    for _ in 0..iterations {
        let mut err = downsample_values(&est, hw, hh, alpha)?;
        for (e, t) in err.iter_mut().zip(&target) {
            *e -= t;
        }
        let correction = upsample_values(&err, w, h, alpha)?;
        for (v, c) in est.iter_mut().zip(&correction) {
            *v -= step * c;
        }
    }
    values_to_plane(&est, hw, hh)
}

fn run_external(command: &str, frame: &Picture, alpha: usize) -> Result<Picture> {
    let plugin_err = |message: String, stderr: String| Error::Plugin { message, stderr };
    let full = format!("{command} --scale {alpha}");
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&full)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| plugin_err(format!("cannot start {full:?}: {e}"), String::new()))?;

    let input = encode_pgm(frame);
    let mut stdin = child.stdin.take().expect("stdin piped");
    let writer = std::thread::spawn(move || {
        // A plugin that exits early closes the pipe; its exit status reports the failure.
        let _ = stdin.write_all(&input);
    });
    let output = child
        .wait_with_output()
        .map_err(|e| plugin_err(format!("waiting for {full:?}: {e}"), String::new()))?;
    let _ = writer.join();

    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    if !output.status.success() {
        return Err(plugin_err(format!("{full:?} exited with {}", output.status), stderr));
    }
    decode_pgm(&output.stdout).map_err(|e| plugin_err(format!("{full:?} produced a malformed PGM: {e}"), stderr))
}
