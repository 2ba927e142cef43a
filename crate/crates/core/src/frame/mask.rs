use std::path::Path;

use super::{load_frame_any_depth, Frame};
use crate::error::{Error, Result};

/// Valid-pixel mask over the sensor, e.g. the telescope pupil.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    width: usize,
    height: usize,
    valid: Vec<bool>,
    pixel_count: usize,
}

impl PixelMask {
    pub fn new(width: usize, height: usize, valid: Vec<bool>) -> Result<Self> {
        if valid.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "{} mask entries for a {width}x{height} mask",
                valid.len()
            )));
        }
        let pixel_count = valid.iter().filter(|&&v| v).count();
        Ok(PixelMask {
            width,
            height,
            valid,
            pixel_count,
        })
    }

    /// Every pixel valid.
    pub fn full(width: usize, height: usize) -> Self {
        PixelMask {
            width,
            height,
            valid: vec![true; width * height],
            pixel_count: width * height,
        }
    }

    /// Mask from an image: non-zero samples are valid.
    pub fn from_frame(frame: &Frame) -> Self {
        let valid = frame.samples().iter().map(|&s| s != 0).collect();
        PixelMask::new(frame.width(), frame.height(), valid).expect("frame dimensions are consistent")
    }

    /// Reads a mask stored as a P5 or raw-container image of any depth.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(PixelMask::from_frame(&load_frame_any_depth(path.as_ref())?))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn pixel_count(&self) -> usize {
        self.pixel_count
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }

    /// Removes every pixel whose Chebyshev ball of the given radius touches an
    /// invalid pixel or leaves the image.
    pub fn erode(&self, radius: usize) -> PixelMask {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        // A square structuring element separates into a row pass and a column pass.
        let mut rows = vec![false; w * h];
        for y in 0..h {
            let line = &self.valid[y * w..(y + 1) * w];
            erode_line(line, radius, &mut rows[y * w..(y + 1) * w]);
        }
        let mut out = vec![false; w * h];
        let mut column = vec![false; h];
        let mut eroded = vec![false; h];
        for x in 0..w {
            for y in 0..h {
                column[y] = rows[y * w + x];
            }
            erode_line(&column, radius, &mut eroded);
            for y in 0..h {
                out[y * w + x] = eroded[y];
            }
        }
        PixelMask::new(w, h, out).expect("dimensions preserved")
    }

    /// 1-based row-major rank of each valid pixel among the valid pixels.
    pub fn ranks(&self) -> Vec<Option<u32>> {
        let mut next = 0u32;
        self.valid
            .iter()
            .map(|&v| {
                v.then(|| {
                    next += 1;
                    next
                })
            })
            .collect()
    }
}

/// 1-D erosion: `out[i]` is true iff `line[i-r..=i+r]` lies inside the line and is all true.
fn erode_line(line: &[bool], radius: usize, out: &mut [bool]) {
    let n = line.len();
    // run[i] = length of the run of valid entries ending at i
    let mut run = vec![0usize; n];
    let mut len = 0;
    for (i, &v) in line.iter().enumerate() {
        len = if v { len + 1 } else { 0 };
        run[i] = len;
    }
    for (i, o) in out.iter_mut().enumerate() {
        let end = i + radius;
        *o = i >= radius && end < n && run[end] > 2 * radius;
    }
}
