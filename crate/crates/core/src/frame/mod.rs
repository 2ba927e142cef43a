//! Image data model: frames, pupil masks and intensity sub-levels.

mod io;
mod levels;
mod mask;

pub(crate) use io::load_frame_any_depth;
pub use io::{decode_frame, encode_pgm, encode_raw, load_frame, save_frame, FrameFormat, RAW_MAGIC};
pub use levels::{quantize_levels, LevelSpec};
pub use mask::PixelMask;

use crate::error::{Error, Result};

/// A rectangular grid of quantized intensity samples, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    bit_depth: u8,
    samples: Vec<u16>,
    frame_index: usize,
}

impl Frame {
    pub fn new(width: usize, height: usize, bit_depth: u8, samples: Vec<u16>, frame_index: usize) -> Result<Self> {
        if !(1..=16).contains(&bit_depth) {
            return Err(Error::InvalidArgument(format!("bit depth {bit_depth} outside 1..=16")));
        }
        if samples.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a {width}x{height} frame",
                samples.len()
            )));
        }
        let max = max_sample(bit_depth);
        if let Some(pos) = samples.iter().position(|&s| u32::from(s) > max) {
            return Err(Error::InvalidArgument(format!(
                "sample {} at index {pos} exceeds {bit_depth}-bit range",
                samples[pos]
            )));
        }
        Ok(Frame {
            width,
            height,
            bit_depth,
            samples,
            frame_index,
        })
    }

    /// All-zero frame.
    pub fn blank(width: usize, height: usize, bit_depth: u8, frame_index: usize) -> Result<Self> {
        Frame::new(width, height, bit_depth, vec![0; width * height], frame_index)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn with_frame_index(mut self, frame_index: usize) -> Self {
        self.frame_index = frame_index;
        self
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.samples[y * self.width + x]
    }
}

/// Largest representable sample for a given depth, `2^E - 1`.
pub fn max_sample(bit_depth: u8) -> u32 {
    (1u32 << bit_depth) - 1
}

/// A binary image, row-major. Used for per-level images and masks alike.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "{} pixels for a {width}x{height} image",
                bits.len()
            )));
        }
        Ok(BinaryImage { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}
