use fastsr_core::eval::mse_samples;
use fastsr_core::synth::Scene;
use fastsr_core::{bicubic_downsample, bicubic_upsample, Error, Picture, SrKind, SrOperator};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ibp_reproduces_its_input_after_downsampling() {
    for alpha in [2, 3, 4] {
        let hr = Scene::natural(3, 48 * alpha, 32 * alpha).render(48 * alpha, 32 * alpha, 0.0);
        let lr = bicubic_downsample(&hr, alpha).unwrap();
        let out = SrOperator::ibp(alpha).unwrap().apply(&lr).unwrap();
        let back = bicubic_downsample(&out, alpha).unwrap();
        for (&a, &b) in back.data().iter().zip(lr.data()) {
            assert!((a as i32 - b as i32).abs() <= 1, "alpha {alpha}: {a} vs {b}");
        }
    }
}

#[test]
fn ibp_beats_bicubic_on_natural_content() {
    let hr = Scene::natural(12, 160, 128).render(160, 128, 0.0);
    let lr = bicubic_downsample(&hr, 2).unwrap();
    let ibp = SrOperator::ibp(2).unwrap().apply(&lr).unwrap();
    let bic = bicubic_upsample(&lr, 2).unwrap();
    assert!(mse_samples(ibp.data(), hr.data()) < mse_samples(bic.data(), hr.data()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ibp_is_more_consistent_than_bicubic(seed in any::<u64>(), w in 4usize..24, h in 4usize..24, alpha in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lr = Picture::from_fn(w, h, |_, _| rng.gen()).unwrap();
        prop_assume!(lr.data().iter().any(|&v| v != lr.data()[0]));
        let ibp = SrOperator::ibp(alpha).unwrap().apply(&lr).unwrap();
        let bic = SrOperator::bicubic(alpha).unwrap().apply(&lr).unwrap();
        prop_assert_eq!(ibp.dims(), (w * alpha, h * alpha));
        let e_ibp = mse_samples(bicubic_downsample(&ibp, alpha).unwrap().data(), lr.data());
        let e_bic = mse_samples(bicubic_downsample(&bic, alpha).unwrap().data(), lr.data());
        prop_assert!(e_ibp < e_bic, "{} vs {}", e_ibp, e_bic);
        // built-in operators are pure
        prop_assert_eq!(SrOperator::ibp(alpha).unwrap().apply(&lr).unwrap(), ibp);
    }
}

#[test]
fn external_plugin_output_is_used() {
    // ignores its input and answers with an 8x8 mid-grey frame
    let cmd = "cat >/dev/null; printf 'P5\\n8 8\\n255\\n'; head -c 64 /dev/zero | tr '\\0' '\\200'; true";
    let op = SrOperator::new(SrKind::External { command: cmd.into() }, 2).unwrap();
    let out = op.apply(&Picture::filled(4, 4, 3).unwrap()).unwrap();
    assert_eq!(out, Picture::filled(8, 8, 128).unwrap());
}

#[test]
fn external_plugin_receives_scale_argument() {
    // fails unless the last argument is the scale
    let cmd = "sh -c 'test \"$1\" = --scale && test \"$2\" = 3 || exit 9; cat >/dev/null; \
               printf \"P5\\n6 3\\n255\\n\"; head -c 18 /dev/zero' stub";
    let op = SrOperator::new(SrKind::External { command: cmd.into() }, 3).unwrap();
    assert_eq!(op.apply(&Picture::filled(2, 1, 0).unwrap()).unwrap().dims(), (6, 3));
}

#[test]
fn wrong_size_plugin_is_rejected() {
    let cmd = "cat >/dev/null; printf 'P5\\n3 3\\n255\\n'; head -c 9 /dev/zero; true";
    let op = SrOperator::new(SrKind::External { command: cmd.into() }, 2).unwrap();
    assert!(matches!(op.apply(&Picture::filled(4, 4, 0).unwrap()), Err(Error::Plugin { .. })));
}

#[test]
fn missing_plugin_is_a_plugin_error() {
    let op = SrOperator::new(
        SrKind::External {
            command: "/nonexistent/sr-binary".into(),
        },
        2,
    )
    .unwrap();
    assert!(matches!(op.apply(&Picture::filled(4, 4, 0).unwrap()), Err(Error::Plugin { .. })));
}

#[test]
fn invalid_scale_rejected() {
    assert!(SrOperator::bicubic(1).is_err());
    assert!(SrOperator::ibp(5).is_err());
}
