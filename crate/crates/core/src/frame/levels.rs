use super::{BinaryImage, Frame, PixelMask};
use crate::error::{Error, Result};

/// Partition of the intensity range `[noise_floor, 2^E]` into sub-levels.
///
/// Level `L` (1-based) holds samples with `boundaries[L-1] <= s < boundaries[L]`.
/// The last boundary is `2^E`, so the top level is closed at the maximum sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpec {
    noise_floor: u32,
    boundaries: Vec<u32>,
}

impl LevelSpec {
    pub const DEFAULT_LEVELS: usize = 8;
    pub const DEFAULT_NOISE_FLOOR: u32 = 1;

    /// Equal-width levels; cut points are `floor + i * (2^E - floor) / k` rounded down.
    pub fn equal_width(level_count: usize, noise_floor: u32, bit_depth: u8) -> Result<Self> {
        if level_count == 0 {
            return Err(Error::InvalidArgument("level count must be positive".into()));
        }
        let top = 1u64 << bit_depth;
        let floor = u64::from(noise_floor);
        if floor + level_count as u64 > top {
            return Err(Error::InvalidArgument(format!(
                "{level_count} levels do not fit in [{noise_floor}, {top}]"
            )));
        }
        let span = top - floor;
        let boundaries = (0..=level_count as u64)
            .map(|i| (floor + i * span / level_count as u64) as u32)
            .collect();
        LevelSpec::from_boundaries(boundaries, bit_depth)
    }

    /// Explicit cut points; must be strictly increasing and end at `2^E`.
    pub fn from_boundaries(boundaries: Vec<u32>, bit_depth: u8) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidArgument("need at least two boundaries".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("boundaries must be strictly increasing".into()));
        }
        let top = 1u32 << bit_depth;
        if *boundaries.last().unwrap() != top {
            return Err(Error::InvalidArgument(format!("last boundary must equal 2^E = {top}")));
        }
        Ok(LevelSpec {
            noise_floor: boundaries[0],
            boundaries,
        })
    }

    pub fn level_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn noise_floor(&self) -> u32 {
        self.noise_floor
    }

    pub fn boundaries(&self) -> &[u32] {
        &self.boundaries
    }

    /// 1-based level of a sample, `None` below the noise floor.
    pub fn level_of(&self, sample: u16) -> Option<usize> {
        let s = u32::from(sample);
        if s < self.noise_floor || s >= *self.boundaries.last().unwrap() {
            return None;
        }
        // number of boundaries <= s, which is at least 1 here
        Some(self.boundaries.partition_point(|&b| b <= s))
    }
}

/// One binary image per level: pixel set iff masked-in and its sample lies in that level.
pub fn quantize_levels(frame: &Frame, mask: &PixelMask, spec: &LevelSpec) -> Result<Vec<BinaryImage>> {
    if frame.width() != mask.width() || frame.height() != mask.height() {
        return Err(Error::InvalidArgument(format!(
            "mask is {}x{} but frame is {}x{}",
            mask.width(),
            mask.height(),
            frame.width(),
            frame.height()
        )));
    }
    let (w, h) = (frame.width(), frame.height());
    let mut images = vec![BinaryImage::empty(w, h); spec.level_count()];
    for (i, (&sample, &valid)) in frame.samples().iter().zip(mask.valid()).enumerate() {
        if !valid {
            continue;
        }
        if let Some(level) = spec.level_of(sample) {
            images[level - 1].set(i % w, i / w, true);
        }
    }
    Ok(images)
}
