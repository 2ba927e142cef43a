//! Frame files: binary portable graymap (P5) and the raw `TRNGFRM1` container.
//!
//! The raw container is a 16-byte little-endian header
//!
//! ```text
//! offset  size  field
//!      0     8  magic "TRNGFRM1"
//!      8     2  width  (u16 LE)
//!     10     2  height (u16 LE)
//!     12     1  bit depth E, 1..=16
//!     13     3  reserved, zero
//! ```
//!
//! followed by `width * height` samples in row-major order, one byte each when
//! `E <= 8` and two bytes little-endian otherwise.

use std::path::Path;

use super::{max_sample, Frame};
use crate::error::{Error, Result};

pub const RAW_MAGIC: &[u8; 8] = b"TRNGFRM1";
const RAW_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    Pgm,
    Raw,
}

impl FrameFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FrameFormat::Pgm => "pgm",
            FrameFormat::Raw => "raw",
        }
    }
}

/// Loads a frame, checking that its declared depth equals `expected_depth`.
pub fn load_frame(path: impl AsRef<Path>, expected_depth: u8, frame_index: usize) -> Result<Frame> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let frame = decode_frame(&bytes, frame_index)?;
    if frame.bit_depth() != expected_depth {
        return Err(Error::DepthMismatch {
            expected: expected_depth,
            found: frame.bit_depth(),
        });
    }
    Ok(frame)
}

pub(crate) fn load_frame_any_depth(path: &Path) -> Result<Frame> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_frame(&bytes, 0)
}

pub fn save_frame(path: impl AsRef<Path>, frame: &Frame, format: FrameFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        FrameFormat::Pgm => encode_pgm(frame),
        FrameFormat::Raw => encode_raw(frame)?,
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Decodes either supported container, sniffing the magic bytes.
pub fn decode_frame(bytes: &[u8], frame_index: usize) -> Result<Frame> {
    if bytes.starts_with(RAW_MAGIC) {
        decode_raw(bytes, frame_index)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(bytes, frame_index)
    } else {
        Err(Error::format(0, "unrecognized magic; expected P5 or TRNGFRM1"))
    }
}

/// Header token reader for netpbm: whitespace separated, `#` comments to end of line.
struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_blank();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start, format!("{what} out of range")))
    }
}

fn decode_pgm(bytes: &[u8], frame_index: usize) -> Result<Frame> {
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    let width = cursor.number("width")? as usize;
    let height = cursor.number("height")? as usize;
    let maxval_offset = cursor.pos;
    let maxval = cursor.number("maxval")?;
    if maxval == 0 || maxval > 65535 || !(maxval + 1).is_power_of_two() {
        return Err(Error::format(
            maxval_offset,
            format!("maxval {maxval} is not of the form 2^E - 1"),
        ));
    }
    let depth = (maxval + 1).trailing_zeros() as u8;
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::format(cursor.pos, "missing whitespace after maxval")),
    }
    let wide = maxval > 255;
    let samples = read_samples(
        bytes,
        cursor.pos,
        width * height,
        depth,
        |chunk| {
            if wide {
                u16::from_be_bytes([chunk[0], chunk[1]])
            } else {
                u16::from(chunk[0])
            }
        },
        if wide { 2 } else { 1 },
    )?;
    Frame::new(width, height, depth, samples, frame_index)
}

fn decode_raw(bytes: &[u8], frame_index: usize) -> Result<Frame> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(Error::format(bytes.len(), "truncated raw header"));
    }
    let width = usize::from(u16::from_le_bytes([bytes[8], bytes[9]]));
    let height = usize::from(u16::from_le_bytes([bytes[10], bytes[11]]));
    let depth = bytes[12];
    if !(1..=16).contains(&depth) {
        return Err(Error::format(12, format!("bit depth {depth} outside 1..=16")));
    }
    if bytes[13..16] != [0, 0, 0] {
        return Err(Error::format(13, "reserved header bytes must be zero"));
    }
    let stride = if depth > 8 { 2 } else { 1 };
    let samples = read_samples(
        bytes,
        RAW_HEADER_LEN,
        width * height,
        depth,
        |chunk| {
            if stride == 2 {
                u16::from_le_bytes([chunk[0], chunk[1]])
            } else {
                u16::from(chunk[0])
            }
        },
        stride,
    )?;
    Frame::new(width, height, depth, samples, frame_index)
}

fn read_samples(
    bytes: &[u8],
    start: usize,
    count: usize,
    depth: u8,
    decode: impl Fn(&[u8]) -> u16,
    stride: usize,
) -> Result<Vec<u16>> {
    let needed = count * stride;
    let payload = bytes.get(start..).unwrap_or_default();
    if payload.len() < needed {
        return Err(Error::format(
            bytes.len(),
            format!("truncated payload: {} of {needed} sample bytes", payload.len()),
        ));
    }
    let max = max_sample(depth);
    payload[..needed]
        .chunks_exact(stride)
        .enumerate()
        .map(|(i, chunk)| {
            let value = decode(chunk);
            if u32::from(value) > max {
                Err(Error::format(
                    start + i * stride,
                    format!("sample {value} exceeds maxval {max}"),
                ))
            } else {
                Ok(value)
            }
        })
        .collect()
}

pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let maxval = max_sample(frame.bit_depth());
    let mut out = format!("P5\n{} {}\n{}\n", frame.width(), frame.height(), maxval).into_bytes();
    if maxval > 255 {
        out.extend(frame.samples().iter().flat_map(|s| s.to_be_bytes()));
    } else {
        out.extend(frame.samples().iter().map(|&s| s as u8));
    }
    out
}

pub fn encode_raw(frame: &Frame) -> Result<Vec<u8>> {
    let width =
        u16::try_from(frame.width()).map_err(|_| Error::InvalidArgument("raw container width exceeds 65535".into()))?;
    let height = u16::try_from(frame.height())
        .map_err(|_| Error::InvalidArgument("raw container height exceeds 65535".into()))?;
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + 2 * frame.samples().len());
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.push(frame.bit_depth());
    out.extend_from_slice(&[0, 0, 0]);
    if frame.bit_depth() > 8 {
        out.extend(frame.samples().iter().flat_map(|s| s.to_le_bytes()));
    } else {
        out.extend(frame.samples().iter().map(|&s| s as u8));
    }
    Ok(out)
}
