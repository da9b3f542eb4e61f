//! CSV rendering of experiment reports.
//!
//! Per-frame file:
//!
//! ```text
//! frame,psnr_bicubic,psnr_sr,psnr_fast,t_sr_ms,t_transfer_ms,t_deblock_ms
//! 0,...
//! #agg,avg4,<psnr_bicubic>,<psnr_sr>,<psnr_fast>
//! #agg,avg16,<psnr_bicubic>,<psnr_sr>,<psnr_fast>
//! #agg,speedup,<value>
//! ```
//!
//! Statistics file: one row per block size class, then `#agg` rows for the
//! totals and fractions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::ExperimentReport;
use crate::error::Result;
use crate::model::BLOCK_SIZES;

pub const CSV_HEADER: &str = "frame,psnr_bicubic,psnr_sr,psnr_fast,t_sr_ms,t_transfer_ms,t_deblock_ms";
pub const STATS_HEADER: &str = "block_size,pixels_total,pixels_zero_mv,pixels_zero_residual";

pub fn report_csv(report: &ExperimentReport) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &report.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.frame_index, r.psnr_bicubic, r.psnr_sr, r.psnr_fast, r.t_sr_ms, r.t_transfer_ms, r.t_deblock_ms
        );
    }
    for (name, a) in [("avg4", report.avg4), ("avg16", report.avg16)] {
        let _ = writeln!(s, "#agg,{name},{},{},{}", a.psnr_bicubic, a.psnr_sr, a.psnr_fast);
    }
    let _ = writeln!(s, "#agg,speedup,{}", report.speedup);
    s
}

pub fn stats_csv(report: &ExperimentReport) -> String {
    let st = &report.stats;
    let mut s = String::new();
    s.push_str(STATS_HEADER);
    s.push('\n');
    for (i, size) in BLOCK_SIZES.iter().enumerate() {
        let _ = writeln!(
            s,
            "{size},{},{},{}",
            st.hist_total[i], st.hist_zero_mv[i], st.hist_zero_residual[i]
        );
    }
    let _ = writeln!(
        s,
        "#agg,total,{},{},{}",
        st.pixels_total, st.pixels_zero_mv, st.pixels_zero_residual
    );
    let _ = writeln!(s, "#agg,zero_mv_fraction,{}", st.zero_mv_fraction());
    let _ = writeln!(s, "#agg,zero_residual_fraction,{}", st.zero_residual_fraction());
    let _ = writeln!(s, "#agg,blocks_transferred,{}", st.blocks_transferred);
    let _ = writeln!(s, "#agg,blocks_fallback,{}", st.blocks_fallback);
    s
}

pub fn emit_csv(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report_csv(report))?;
    Ok(())
}

pub fn emit_stats(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, stats_csv(report))?;
    Ok(())
}
