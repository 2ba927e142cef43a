mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use speckle_trng::centroids::connected_components;
use speckle_trng::frame::{decode_frame, load_frame, quantize_levels, save_frame, BinaryImage, FrameFormat};
use speckle_trng::sim::{gen_speckle_frame, SimConfig};
use speckle_trng::{Connectivity, Error, Frame, LevelSpec, PixelMask};

fn random_frame(width: usize, height: usize, depth: u8, seed: u64) -> Frame {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let max = (1u32 << depth) - 1;
    let samples = (0..width * height).map(|_| rng.random_range(0..=max) as u16).collect();
    Frame::new(width, height, depth, samples, 0).unwrap()
}

#[test]
fn simulator_frame_round_trips_full_size() {
    let dir = tempfile::tempdir().unwrap();
    let config = SimConfig {
        background_noise_sigma: 3.0,
        ..SimConfig::default()
    };
    let (frame, _) = gen_speckle_frame(&config, 4).unwrap();
    assert_eq!((frame.width(), frame.height()), (640, 480));
    for format in [FrameFormat::Pgm, FrameFormat::Raw] {
        let path = dir.path().join(format!("f.{}", format.extension()));
        save_frame(&path, &frame, format).unwrap();
        let back = load_frame(&path, 8, 4).unwrap();
        assert_eq!(back, frame);
    }
}

#[test]
fn random_frames_round_trip_at_every_depth() {
    let dir = tempfile::tempdir().unwrap();
    for depth in [1u8, 4, 8, 10, 12, 16] {
        let frame = random_frame(37, 23, depth, depth as u64);
        for format in [FrameFormat::Pgm, FrameFormat::Raw] {
            let path = dir.path().join(format!("d{depth}.{}", format.extension()));
            save_frame(&path, &frame, format).unwrap();
            assert_eq!(load_frame(&path, depth, 0).unwrap(), frame, "depth {depth} {format:?}");
        }
    }
}

#[test]
fn small_pgm_and_depth_mismatch() {
    let mut bytes = b"P5\n2 2\n255\n".to_vec();
    bytes.extend([0, 128, 255, 7]);
    let frame = decode_frame(&bytes, 0).unwrap();
    assert_eq!(frame.samples(), &[0, 128, 255, 7]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deep.pgm");
    save_frame(&path, &random_frame(2, 2, 16, 1), FrameFormat::Pgm).unwrap();
    let err = load_frame(&path, 8, 3).unwrap_err();
    assert!(matches!(err, Error::DepthMismatch { .. }));
    assert!(err.to_string().contains("depth mismatch"));
}

#[test]
fn level_union_is_thresholded_mask() {
    for seed in 0..10 {
        let frame = random_frame(50, 40, 8, seed);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed + 100);
        let mask = PixelMask::new(50, 40, (0..2000).map(|_| rng.random_bool(0.8)).collect()).unwrap();
        let floor = 20 + seed as u32;
        let spec = LevelSpec::equal_width(8, floor, 8).unwrap();
        let levels = quantize_levels(&frame, &mask, &spec).unwrap();
        for y in 0..40 {
            for x in 0..50 {
                let hits = levels.iter().filter(|l| l.get(x, y)).count();
                let expected = u32::from(frame.get(x, y)) >= floor && mask.is_valid(x, y);
                assert_eq!(hits, expected as usize, "({x}, {y})");
            }
        }
    }
}

#[test]
fn components_match_union_find() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    for round in 0..40 {
        let density = 0.2 + 0.015 * round as f64;
        let bits: Vec<bool> = (0..64 * 64).map(|_| rng.random_bool(density)).collect();
        let image = BinaryImage::new(64, 64, bits.clone()).unwrap();
        for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
            let expected = common::union_find_components(&bits, 64, 64, eight);
            assert_eq!(connected_components(&image, conn), expected);
        }
    }
}

fn arb_mask() -> impl Strategy<Value = PixelMask> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::bool::weighted(0.85), w * h)
            .prop_map(move |valid| PixelMask::new(w, h, valid).unwrap())
    })
}

proptest! {
    #[test]
    fn erosion_is_monotone(mask in arb_mask(), r in 0usize..4) {
        let a = mask.erode(r);
        let b = mask.erode(r + 1);
        prop_assert!(b.pixel_count() <= a.pixel_count());
        for (i, &v) in b.valid().iter().enumerate() {
            prop_assert!(!v || (a.valid()[i] && mask.valid()[i]));
        }
        prop_assert_eq!(mask.erode(r).erode(1), b);
    }

    #[test]
    fn components_partition_set_pixels(
        bits in prop::collection::vec(any::<bool>(), 20 * 15),
        eight: bool,
    ) {
        let image = BinaryImage::new(20, 15, bits.clone()).unwrap();
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let comps = connected_components(&image, conn);
        let mut owner = vec![None; bits.len()];
        for (c, pixels) in comps.iter().enumerate() {
            for &(x, y) in pixels {
                prop_assert!(owner[y * 20 + x].is_none());
                owner[y * 20 + x] = Some(c);
            }
        }
        for (i, &b) in bits.iter().enumerate() {
            prop_assert_eq!(b, owner[i].is_some());
        }
    }
}
