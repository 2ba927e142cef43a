//! Synthetic speckle frames with known ground truth, and the ideal i.i.d.
//! centroid source the extraction assumes.
//!
//! Randomness comes from Xoshiro256++ (period `2^256 - 1`). Each frame gets its
//! own generator seeded from `(seed, frame_index)` through SplitMix64, so any
//! frame can be regenerated on its own and frames can be produced in parallel.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal, Poisson};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::centroids::CentroidSet;
use crate::error::{Error, Result};
use crate::frame::{max_sample, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Rendered Gaussian spots, processed by the image pipeline.
    #[default]
    Speckle,
    /// Uniform random urn sets drawn directly, bypassing images.
    Oracle,
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "speckle" => Ok(SimMode::Speckle),
            "oracle" => Ok(SimMode::Oracle),
            other => Err(Error::Config(format!("unknown simulator mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    /// Poisson mean of spots per frame (speckle) or occupied urns per frame (oracle).
    pub spot_count_mean: f64,
    /// Gaussian radius of a spot, pixels.
    pub spot_sigma: f64,
    /// Peak intensities are drawn uniformly from this closed range.
    pub intensity_min: f64,
    pub intensity_max: f64,
    /// Standard deviation of additive Gaussian read noise.
    pub background_noise_sigma: f64,
    pub seed: u64,
    pub mode: SimMode,
    pub frame_count: usize,
    /// Urn count for oracle mode; `None` means levels times the eroded full-frame mask.
    pub urns: Option<u64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            width: 640,
            height: 480,
            bit_depth: 8,
            spot_count_mean: 200.0,
            spot_sigma: 1.5,
            intensity_min: 64.0,
            intensity_max: 255.0,
            background_noise_sigma: 0.0,
            seed: 0,
            mode: SimMode::Speckle,
            frame_count: 10,
            urns: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.width == 0 || self.height == 0 {
            return fail("frame dimensions must be positive".into());
        }
        if !(1..=16).contains(&self.bit_depth) {
            return fail(format!("bit depth {} outside 1..=16", self.bit_depth));
        }
        if !(self.spot_count_mean >= 0.0 && self.spot_count_mean.is_finite()) {
            return fail("spot_count_mean must be non-negative".into());
        }
        if !(self.spot_sigma > 0.0 && self.spot_sigma.is_finite()) {
            return fail("spot_sigma must be positive".into());
        }
        if !(self.intensity_min >= 0.0 && self.intensity_min <= self.intensity_max) {
            return fail("intensity range must satisfy 0 <= min <= max".into());
        }
        if self.background_noise_sigma.is_nan() || self.background_noise_sigma < 0.0 {
            return fail("background_noise_sigma must be non-negative".into());
        }
        if self.urns == Some(0) {
            return fail("urns must be positive".into());
        }
        Ok(())
    }
}

/// Planted spot: centre in pixel coordinates and peak intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpot {
    pub x: f64,
    pub y: f64,
    pub peak: f64,
}

/// Deterministic generator for one frame.
pub fn frame_rng(seed: u64, frame_index: usize) -> Xoshiro256PlusPlus {
    let mut state = seed ^ (frame_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    Xoshiro256PlusPlus::seed_from_u64(splitmix64(&mut state))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Renders Gaussian spots plus read noise, clamped and rounded to `E` bits.
pub fn render_spots<R: Rng>(
    config: &SimConfig,
    spots: &[PlantedSpot],
    frame_index: usize,
    rng: &mut R,
) -> Result<Frame> {
    let (w, h) = (config.width, config.height);
    let mut field = vec![0f64; w * h];
    let reach = (5.0 * config.spot_sigma).ceil() as isize;
    let inv = 1.0 / (2.0 * config.spot_sigma * config.spot_sigma);
    for spot in spots {
        let (cx, cy) = (spot.x.floor() as isize, spot.y.floor() as isize);
        for py in (cy - reach).max(0)..=(cy + reach).min(h as isize - 1) {
            for px in (cx - reach).max(0)..=(cx + reach).min(w as isize - 1) {
                let (dx, dy) = (px as f64 - spot.x, py as f64 - spot.y);
                field[py as usize * w + px as usize] += spot.peak * (-(dx * dx + dy * dy) * inv).exp();
            }
        }
    }
    if config.background_noise_sigma > 0.0 {
        let noise = Normal::new(0.0, config.background_noise_sigma).expect("finite sigma");
        for v in &mut field {
            *v += noise.sample(rng);
        }
    }
    let max = f64::from(max_sample(config.bit_depth));
    let samples = field.iter().map(|v| v.round().clamp(0.0, max) as u16).collect();
    Frame::new(w, h, config.bit_depth, samples, frame_index)
}

/// One speckle frame and the spots planted in it.
pub fn gen_speckle_frame(config: &SimConfig, frame_index: usize) -> Result<(Frame, Vec<PlantedSpot>)> {
    config.validate()?;
    let mut rng = frame_rng(config.seed, frame_index);
    let count = poisson_count(&mut rng, config.spot_count_mean);
    let spots: Vec<PlantedSpot> = (0..count)
        .map(|_| PlantedSpot {
            x: rng.random::<f64>() * config.width as f64,
            y: rng.random::<f64>() * config.height as f64,
            peak: if config.intensity_max > config.intensity_min {
                rng.random_range(config.intensity_min..=config.intensity_max)
            } else {
                config.intensity_min
            },
        })
        .collect();
    let frame = render_spots(config, &spots, frame_index, &mut rng)?;
    Ok((frame, spots))
}

/// Ground truth CSV lines `frame,cx,cy,peak`.
pub fn ground_truth_csv(frame_index: usize, spots: &[PlantedSpot]) -> String {
    spots
        .iter()
        .map(|s| format!("{frame_index},{},{},{}\n", s.x, s.y, s.peak))
        .collect()
}

/// Uniformly random `n`-subset of `1..=N`, by a partial Fisher-Yates shuffle
/// over a sparse swap table.
pub fn gen_uniform_centroid_set<R: Rng>(urn_count: u64, occupied: u64, rng: &mut R) -> Result<Vec<u64>> {
    if occupied > urn_count {
        return Err(Error::InvalidArgument(format!(
            "{occupied} occupied urns exceed {urn_count} urns"
        )));
    }
    let mut swapped: HashMap<u64, u64> = HashMap::with_capacity(occupied as usize * 2);
    let mut picked = Vec::with_capacity(occupied as usize);
    for i in 0..occupied {
        let j = rng.random_range(i..urn_count);
        let at_j = *swapped.get(&j).unwrap_or(&j);
        let at_i = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, at_i);
        picked.push(at_j + 1);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Seeded convenience wrapper returning a [`CentroidSet`].
pub fn uniform_centroid_set(urn_count: u64, occupied: u64, seed: u64) -> Result<CentroidSet> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    CentroidSet::new(0, urn_count, gen_uniform_centroid_set(urn_count, occupied, &mut rng)?)
}

/// Oracle-mode frame: `Poisson(spot_count_mean)` occupied urns (capped at `N`)
/// placed uniformly.
pub fn gen_oracle_set(config: &SimConfig, urn_count: u64, frame_index: usize) -> Result<CentroidSet> {
    config.validate()?;
    let mut rng = frame_rng(config.seed, frame_index);
    let n = poisson_count(&mut rng, config.spot_count_mean).min(urn_count);
    let urns = gen_uniform_centroid_set(urn_count, n, &mut rng)?;
    CentroidSet::new(frame_index, urn_count, urns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_spots_no_noise_is_black() {
        let config = SimConfig {
            width: 32,
            height: 16,
            spot_count_mean: 0.0,
            ..SimConfig::default()
        };
        let (frame, spots) = gen_speckle_frame(&config, 0).unwrap();
        assert!(spots.is_empty());
        assert!(frame.samples().iter().all(|&s| s == 0));
    }

    #[test]
    fn frames_are_reproducible() {
        let config = SimConfig {
            width: 64,
            height: 48,
            background_noise_sigma: 2.0,
            spot_count_mean: 20.0,
            seed: 99,
            ..SimConfig::default()
        };
        assert_eq!(
            gen_speckle_frame(&config, 5).unwrap().0,
            gen_speckle_frame(&config, 5).unwrap().0
        );
        assert_ne!(
            gen_speckle_frame(&config, 5).unwrap().0,
            gen_speckle_frame(&config, 6).unwrap().0
        );
    }

    #[test]
    fn full_subset() {
        let s = uniform_centroid_set(9, 9, 4).unwrap();
        assert_eq!(s.occupied(), &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert!(uniform_centroid_set(3, 4, 0).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = SimConfig {
            spot_sigma: 0.0,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimConfig {
            intensity_min: 10.0,
            intensity_max: 5.0,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }

    #[test]
    fn ground_truth_lines() {
        let s = [PlantedSpot {
            x: 1.5,
            y: 2.0,
            peak: 200.0,
        }];
        assert_eq!(ground_truth_csv(3, &s), "3,1.5,2,200\n");
    }
}
