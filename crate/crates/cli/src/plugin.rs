//! The `sr-plugin` subcommand: a reference implementation of the external
//! SR protocol, useful as a template and as a slow stand-in in benchmarks.

use std::io::{Read, Write};
use std::time::Duration;

use anyhow::{Context, Result};
use fastsr_core::pgm::{decode_pgm, encode_pgm};
use fastsr_core::{SrKind, SrOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PluginMethod {
    Bicubic,
    Ibp,
}

/// Read a PGM frame from stdin, super-resolve it and write a PGM to stdout.
pub fn run(method: PluginMethod, scale: usize, delay_ms: u64) -> Result<()> {
    let mut input = Vec::new();
    std::io::stdin().read_to_end(&mut input).context("reading stdin")?;
    let frame = decode_pgm(&input).context("decoding input frame")?;
    let kind = match method {
        PluginMethod::Bicubic => SrKind::Bicubic,
        PluginMethod::Ibp => SrKind::ibp(),
    };
    let out = SrOperator::new(kind, scale)?.apply(&frame)?;
    if delay_ms > 0 {
        std::thread::sleep(Duration::from_millis(delay_ms));
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(&encode_pgm(&out))?;
    stdout.flush()?;
    Ok(())
}
