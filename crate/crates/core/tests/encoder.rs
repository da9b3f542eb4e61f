use fastsr_core::encoder::sidecar::{read_sidecar, write_sidecar, HEADER_LEN};
use fastsr_core::encoder::{build_quadtree, estimate_motion_integer, refine_qpel, Region};
use fastsr_core::synth::Scene;
use fastsr_core::{
    decode_frame, decode_sequence, encode_frame, encode_sequence, qpel_fetch_block, EncoderConfig, MvPrecision,
    Picture, QuarterPelMv, ResidualMode, Sidecar,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(w: usize, h: usize, seed: u64) -> Picture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Picture::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

fn shifted(p: &Picture, dx: isize, dy: isize) -> Picture {
    Picture::from_fn(p.width(), p.height(), |x, y| p.get_clamped(x as isize - dx, y as isize - dy)).unwrap()
}

/// Exhaustive search with edge-replicated reads and the documented tie-break.
fn brute_force(reference: &Picture, cur: &Picture, r: Region, range: i32) -> (i32, i32, u64) {
    let mut best: Option<(u64, i32, i32, i32)> = None;
    for dy in -range..=range {
        for dx in -range..=range {
            let mut sad = 0u64;
            for y in r.y..r.y + r.h {
                for x in r.x..r.x + r.w {
                    let p = reference.get_clamped(x as isize + dx as isize, y as isize + dy as isize);
                    sad += (cur.get(x, y) as i64 - p as i64).unsigned_abs();
                }
            }
            let key = (sad, dx.abs() + dy.abs(), dy, dx);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    let (sad, _, dy, dx) = best.unwrap();
    (dx, dy, sad)
}

#[test]
fn integer_search_matches_brute_force() {
    let reference = noise(40, 32, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..12 {
        // mostly a shifted copy with some fresh noise mixed in, so ties and
        // border clamping both get exercised
        let cur = if case % 3 == 0 {
            noise(40, 32, 100 + case)
        } else {
            let base = shifted(&reference, rng.gen_range(-3..=3), rng.gen_range(-3..=3));
            Picture::from_fn(40, 32, |x, y| if rng.gen_bool(0.1) { rng.gen() } else { base.get(x, y) }).unwrap()
        };
        let region = Region::new(rng.gen_range(0..32), rng.gen_range(0..24), 8, 8);
        let (mv, sad) = estimate_motion_integer(&reference, &cur, region, 4).unwrap();
        let (dx, dy, bsad) = brute_force(&reference, &cur, region, 4);
        assert_eq!((mv, sad), (QuarterPelMv::from_pixels(dx, dy), bsad), "case {case}");
    }
}

#[test]
fn flat_frames_prefer_zero_vector() {
    let a = Picture::filled(32, 32, 90).unwrap();
    let (mv, sad) = estimate_motion_integer(&a, &a, Region::new(8, 8, 16, 16), 8).unwrap();
    assert_eq!((mv, sad), (QuarterPelMv::ZERO, 0));
}

#[test]
fn three_pixel_shift() {
    let reference = noise(64, 48, 7);
    let cur = shifted(&reference, 3, 0);
    let (mv, sad) = estimate_motion_integer(&reference, &cur, Region::new(16, 16, 16, 16), 8).unwrap();
    assert_eq!(mv, QuarterPelMv::new(-12, 0));
    assert_eq!(sad, 0);
}

#[test]
fn refinement_recovers_fractional_shift() {
    let reference = Scene::natural(5, 64, 64).render(64, 64, 0.0);
    let region = Region::new(24, 24, 16, 16);
    for target in [QuarterPelMv::new(2, 0), QuarterPelMv::new(6, -3), QuarterPelMv::new(-5, 1)] {
        let block = qpel_fetch_block(&reference, 0, 0, 64, 64, target).unwrap();
        let cur = Picture::from_vec(64, 64, block).unwrap();
        let (mv_int, sad_int) = estimate_motion_integer(&reference, &cur, region, 8).unwrap();
        let (mv_half, sad_half) = refine_qpel(&reference, &cur, region, mv_int, 8, MvPrecision::Half).unwrap();
        let (mv_q, sad_q) = refine_qpel(&reference, &cur, region, mv_int, 8, MvPrecision::Quarter).unwrap();
        assert!(sad_q <= sad_half && sad_half <= sad_int, "{target}: {sad_int} {sad_half} {sad_q}");
        assert_eq!(mv_half.dx % 2, 0);
        assert_eq!(mv_half.dy % 2, 0);
        assert_eq!((mv_q, sad_q), (target, 0));
    }
}

#[test]
fn refinement_rejects_fractional_start() {
    let p = noise(16, 16, 3);
    assert!(refine_qpel(&p, &p, Region::new(0, 0, 8, 8), QuarterPelMv::new(1, 0), 4, MvPrecision::Quarter).is_err());
}

#[test]
fn changed_block_splits_to_minimum() {
    let reference = noise(128, 64, 9);
    let patch = noise(8, 8, 10);
    let cur = Picture::from_fn(128, 64, |x, y| {
        if (88..96).contains(&x) && (16..24).contains(&y) {
            patch.get(x - 88, y - 16)
        } else {
            reference.get(x, y)
        }
    })
    .unwrap();
    let cfg = EncoderConfig {
        split_threshold: 0.5,
        ..Default::default()
    };
    let part = build_quadtree(&reference, &cur, &cfg).unwrap();
    let dims: Vec<(usize, usize, usize)> = part.leaves().iter().map(|l| (l.x, l.y, l.w)).collect();
    assert_eq!(
        dims,
        vec![
            (0, 0, 64),
            (64, 0, 16),
            (80, 0, 16),
            (64, 16, 16),
            (80, 16, 8),
            (88, 16, 8),
            (80, 24, 8),
            (88, 24, 8),
            (96, 0, 32),
            (64, 32, 32),
            (96, 32, 32),
        ]
    );
    for l in part.leaves() {
        if (l.x, l.y) != (88, 16) {
            assert!(l.mv.is_zero());
        }
    }
}

#[test]
fn border_blocks_are_clipped() {
    let a = noise(100, 60, 4);
    let b = shifted(&a, 1, 1);
    let part = build_quadtree(&a, &b, &EncoderConfig::default()).unwrap();
    let area: usize = part.leaves().iter().map(|l| l.area()).sum();
    assert_eq!(area, 6000);
    assert!(part.leaf_map().iter().all(|&i| (i as usize) < part.len()));
    for l in part.leaves() {
        assert!(l.x + l.w <= 100 && l.y + l.h <= 60);
        assert!(l.w <= 64 && l.h <= 64 && l.w >= 4 && l.h >= 4);
    }
    // the 36-wide right column and 60-high bottom row appear
    assert!(part.leaves().iter().any(|l| l.x + l.w == 100));
    assert!(part.leaves().iter().any(|l| l.y + l.h == 60));
}

#[test]
fn invalid_config_rejected() {
    let p = noise(16, 16, 1);
    for cfg in [
        EncoderConfig { min_block: 12, ..Default::default() },
        EncoderConfig { max_block: 128, ..Default::default() },
        EncoderConfig { min_block: 32, max_block: 16, ..Default::default() },
        EncoderConfig { search_range: 0, ..Default::default() },
    ] {
        assert!(build_quadtree(&p, &p, &cfg).is_err());
    }
}

#[test]
fn deadzone_noise_gives_all_skip() {
    let reference = noise(64, 64, 21);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let cur = Picture::from_fn(64, 64, |x, y| (reference.get(x, y) as i32 + rng.gen_range(-1..=1)).clamp(0, 255) as u8)
        .unwrap();
    let cfg = EncoderConfig {
        residual_mode: ResidualMode::Deadzone,
        deadzone: 2,
        ..Default::default()
    };
    let (syntax, _) = encode_frame(&reference, &cur, &cfg, 1).unwrap();
    assert!(syntax.partition.leaves().iter().all(|l| l.skip));
    assert!(syntax.residual.data().iter().all(|&r| r == 0));
}

fn small_cfg(mode: ResidualMode, dz: u8) -> EncoderConfig {
    EncoderConfig {
        search_range: 3,
        max_block: 16,
        residual_mode: mode,
        deadzone: dz,
        ..Default::default()
    }
}

fn pair(seed: u64, w: usize, h: usize, dx: f64, dy: f64) -> (Picture, Picture) {
    let s = Scene::natural(seed, w, h).with_pan(dx, dy);
    (s.render(w, h, 0.0), s.render(w, h, 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lossless_reconstruction_is_exact(seed in any::<u64>(), w in 9usize..40, h in 9usize..40,
                                        dx in -2.0f64..2.0, dy in -2.0f64..2.0) {
        let (a, b) = pair(seed, w, h, dx, dy);
        let cfg = small_cfg(ResidualMode::Lossless, 0);
        let (syntax, recon) = encode_frame(&a, &b, &cfg, 1).unwrap();
        prop_assert_eq!(&recon, &b);
        prop_assert_eq!(decode_frame(&a, &syntax).unwrap(), b);
        for l in syntax.partition.leaves() {
            prop_assert!(l.mv.dx.abs() <= 12 && l.mv.dy.abs() <= 12);
        }
    }

    #[test]
    fn deadzone_error_is_bounded(seed in any::<u64>(), dz in 0u8..6, dx in -2.0f64..2.0) {
        let (a, b) = pair(seed, 33, 21, dx, 0.5);
        let cfg = small_cfg(ResidualMode::Deadzone, dz);
        let (syntax, recon) = encode_frame(&a, &b, &cfg, 1).unwrap();
        for (&r, &c) in recon.data().iter().zip(b.data()) {
            prop_assert!((r as i32 - c as i32).abs() <= dz as i32);
        }
        prop_assert!(syntax.residual.data().iter().all(|&r| r == 0 || r.unsigned_abs() > dz as u16));
        prop_assert_eq!(decode_frame(&a, &syntax).unwrap(), recon);
    }

    #[test]
    fn sidecar_round_trip(seed in any::<u64>(), w in 9usize..72, h in 9usize..40, deadzone in any::<bool>()) {
        let s = Scene::natural(seed, w, h).with_pan(1.25, -0.5);
        let frames = s.clip(w, h, 3);
        let mode = if deadzone { ResidualMode::Deadzone } else { ResidualMode::Lossless };
        let cfg = small_cfg(mode, 2);
        let (syntax, recon) = encode_sequence(&frames, &cfg).unwrap();
        let sc = Sidecar { width: w, height: h, residual_mode: mode, deadzone: 2, frames: syntax };
        let bytes = sc.to_bytes().unwrap();
        let back = Sidecar::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &sc);
        prop_assert_eq!(decode_sequence(&frames[0], &back.frames).unwrap(), recon);
        // every truncation is reported, never a panic
        for cut in [1, HEADER_LEN - 1, HEADER_LEN + 3, bytes.len() - 1] {
            prop_assert!(Sidecar::from_bytes(&bytes[..cut.min(bytes.len() - 1)]).is_err());
        }
    }
}

#[test]
fn sidecar_file_round_trip() {
    let (a, b) = pair(3, 48, 40, 0.75, 0.25);
    let (syntax, _) = encode_sequence(&[a, b], &EncoderConfig::default()).unwrap();
    let sc = Sidecar {
        width: 48,
        height: 40,
        residual_mode: ResidualMode::Lossless,
        deadzone: 0,
        frames: syntax,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clip.fstx");
    write_sidecar(&path, &sc).unwrap();
    assert_eq!(read_sidecar(&path).unwrap(), sc);
}
