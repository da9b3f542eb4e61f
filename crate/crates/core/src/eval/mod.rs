//! Quality metrics and the experiment harness.

mod experiment;
mod metrics;
mod report;

pub use experiment::{
    averages, crop_to_multiple, run_chained_experiment, run_deblock_ablation, run_mv_accuracy_sweep,
    run_prepared_experiment, speedup, AblationRow, Averages, ExperimentConfig, ExperimentReport, FrameRecord,
    PreparedClip,
};
pub use metrics::{mse_samples, psnr, psnr_samples};
pub use report::{emit_csv, emit_stats, report_csv, stats_csv, CSV_HEADER, STATS_HEADER};
