//! Fixtures shared by the pipeline benchmarks.

use fastsr_core::synth::Scene;
use fastsr_core::{bicubic_downsample, encode_frame, EncoderConfig, FrameSyntax, Picture, SrOperator};

/// CIF-sized low-resolution input, as produced from a 704x576 source.
pub const LR_WIDTH: usize = 352;
pub const LR_HEIGHT: usize = 288;

/// Two consecutive frames of a panning clip with one moving object.
pub fn hr_pair(alpha: usize) -> (Picture, Picture) {
    let (w, h) = (LR_WIDTH * alpha, LR_HEIGHT * alpha);
    let s = Scene::natural(42, w, h)
        .with_pan(1.5, 0.75)
        .with_moving_disk(w as f64 * 0.4, h as f64 * 0.5, h as f64 * 0.15, (3.0, -1.0));
    (s.render(w, h, 0.0), s.render(w, h, 1.0))
}

/// Everything a transfer step needs: the previous output, the current
/// low-resolution frame and its syntax.
pub struct TransferInput {
    pub prev_hr: Picture,
    pub cur_lr: Picture,
    pub syntax: FrameSyntax,
}

pub fn transfer_input(alpha: usize) -> TransferInput {
    let (hr1, hr2) = hr_pair(alpha);
    let lr1 = bicubic_downsample(&hr1, alpha).expect("dimensions divide");
    let lr2 = bicubic_downsample(&hr2, alpha).expect("dimensions divide");
    let (syntax, cur_lr) = encode_frame(&lr1, &lr2, &EncoderConfig::default(), 1).expect("valid frames");
    let prev_hr = SrOperator::ibp(alpha).and_then(|sr| sr.apply(&lr1)).expect("valid scale");
    TransferInput {
        prev_hr,
        cur_lr,
        syntax,
    }
}
