mod common;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use speckle_trng::centroids::{detect_spots, extract_centroid_set};
use speckle_trng::sim::{
    gen_speckle_frame, gen_uniform_centroid_set, render_spots, uniform_centroid_set, PlantedSpot, SimConfig,
};
use speckle_trng::stats::chi_square_upper;
use speckle_trng::{lex_rank, LevelSpec, PixelMask, SpotParams};

fn one_level(floor: u32) -> LevelSpec {
    LevelSpec::equal_width(1, floor, 8).unwrap()
}

#[test]
fn single_bump_is_recovered_exactly() {
    let config = SimConfig {
        width: 40,
        height: 30,
        ..SimConfig::default()
    };
    let spot = PlantedSpot {
        x: 17.0,
        y: 11.0,
        peak: 200.0,
    };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0);
    let frame = render_spots(&config, &[spot], 0, &mut rng).unwrap();
    let mask = PixelMask::full(40, 30);
    let set = extract_centroid_set(&frame, &mask, &one_level(30), SpotParams::default()).unwrap();
    assert_eq!(set.occupied(), &[11 * 40 + 17 + 1]);
}

#[test]
fn planted_grid_gives_planted_urns() {
    // spots on integer centres 12 px apart: every bump is symmetric about its pixel
    let config = SimConfig {
        width: 120,
        height: 96,
        ..SimConfig::default()
    };
    let mut spots = Vec::new();
    for gy in 0..7 {
        for gx in 0..9 {
            spots.push(PlantedSpot {
                x: (8 + 12 * gx) as f64,
                y: (8 + 12 * gy) as f64,
                peak: 80.0 + 20.0 * ((gx + gy) % 8) as f64,
            });
        }
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0);
    let frame = render_spots(&config, &spots, 0, &mut rng).unwrap();
    let mask = PixelMask::full(120, 96);
    let set = extract_centroid_set(&frame, &mask, &one_level(40), SpotParams::default()).unwrap();
    let mut planted: Vec<u64> = spots.iter().map(|s| s.y as u64 * 120 + s.x as u64 + 1).collect();
    planted.sort_unstable();
    assert_eq!(set.occupied(), &planted[..]);
}

#[test]
fn separated_noisy_spots_within_one_pixel() {
    let config = SimConfig {
        width: 400,
        height: 300,
        background_noise_sigma: 6.0,
        ..SimConfig::default()
    };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(9);
    let (mut total, mut good) = (0, 0);
    for frame_index in 0..10 {
        // jittered grid, spacing 16 px > 6 sigma
        let spots: Vec<PlantedSpot> = (0..18 * 24)
            .map(|i| {
                use rand::Rng;
                PlantedSpot {
                    x: 12.0 + 16.0 * (i % 24) as f64 + rng.random_range(-2.0..2.0),
                    y: 12.0 + 16.0 * (i / 24) as f64 + rng.random_range(-2.0..2.0),
                    peak: rng.random_range(120.0..250.0),
                }
            })
            .collect();
        let frame = render_spots(&config, &spots, frame_index, &mut rng).unwrap();
        let mask = PixelMask::full(400, 300);
        let found = detect_spots(&frame, &mask, &one_level(60), SpotParams::default()).unwrap();
        for s in &spots {
            total += 1;
            let hit = found
                .spots
                .iter()
                .any(|d| (d.centroid_x - s.x).abs() < 1.0 && (d.centroid_y - s.y).abs() < 1.0);
            good += hit as usize;
        }
    }
    assert!(good as f64 >= 0.99 * total as f64, "{good} of {total} recovered");
}

#[test]
fn spot_count_is_poisson_mean() {
    let config = SimConfig {
        width: 32,
        height: 32,
        spot_count_mean: 50.0,
        seed: 21,
        ..SimConfig::default()
    };
    let counts: Vec<usize> = (0..1000)
        .map(|i| gen_speckle_frame(&config, i).unwrap().1.len())
        .collect();
    let mean = counts.iter().sum::<usize>() as f64 / 1000.0;
    assert!((mean - 50.0).abs() < 3.0 * (50.0f64 / 1000.0).sqrt(), "mean {mean}");
}

#[test]
fn full_scale_speckle_occupancy() {
    // 891000 pixels, one level: about 1600 separate spots minus overlaps
    let config = SimConfig {
        width: 1000,
        height: 891,
        spot_count_mean: 1600.0,
        seed: 4,
        ..SimConfig::default()
    };
    let mask = PixelMask::full(1000, 891);
    let (frame, planted) = gen_speckle_frame(&config, 0).unwrap();
    let set = extract_centroid_set(&frame, &mask, &one_level(32), SpotParams::default()).unwrap();
    assert_eq!(set.urn_count(), 891_000);
    let n = set.len() as f64;
    assert!(
        n <= planted.len() as f64 && n > 0.85 * planted.len() as f64,
        "{n} of {}",
        planted.len()
    );
}

#[test]
fn five_choose_two_is_uniform() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(77);
    let subsets = common::all_subsets(5, 2);
    let mut counts = vec![0u64; subsets.len()];
    for _ in 0..100_000 {
        let s = gen_uniform_centroid_set(5, 2, &mut rng).unwrap();
        counts[subsets.iter().position(|x| *x == s).unwrap()] += 1;
    }
    let sigma = (100_000.0f64 * 0.1 * 0.9).sqrt();
    assert!(
        counts.iter().all(|&c| (c as f64 - 10_000.0).abs() < 3.0 * sigma),
        "{counts:?}"
    );
    assert!(chi_square_upper(common::chi_square_uniform(&counts), 9.0) > 0.001);
}

#[test]
fn ranks_of_draws_are_uniform() {
    let mut counts = vec![0u64; 495];
    for seed in 0..99_000 {
        let set = uniform_centroid_set(12, 4, seed).unwrap();
        let rank: u64 = lex_rank(&set).rank.try_into().unwrap();
        counts[rank as usize] += 1;
    }
    assert!(chi_square_upper(common::chi_square_uniform(&counts), 494.0) > 0.001);
}

#[test]
fn full_draw_is_everything() {
    for seed in 0..5 {
        assert_eq!(
            uniform_centroid_set(30, 30, seed).unwrap().occupied(),
            &(1..=30).collect::<Vec<_>>()[..]
        );
    }
    assert!(uniform_centroid_set(3, 4, 0).is_err());
}
