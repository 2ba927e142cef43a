//! Spot detection and the mapping from a frame to its occupied-urn set.
//!
//! Each intensity level is binarized and split into connected spots. A spot's
//! centroid (first moments over zeroth moment) is floored to the pixel containing
//! it, and that (level, pixel) cell is an urn. Urns are numbered level-major, then
//! row-major over the valid mask pixels, starting at 1.

use crate::error::{Error, Result};
use crate::frame::{quantize_levels, BinaryImage, Frame, LevelSpec, PixelMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        }
    }
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            other => Err(Error::InvalidArgument(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

/// Pixel coordinate `(x, y)`.
pub type Pixel = (usize, usize);

/// Splits the set pixels into connected components.
///
/// Components are ordered by their smallest row-major member and each pixel
/// list is sorted row-major.
pub fn connected_components(image: &BinaryImage, connectivity: Connectivity) -> Vec<Vec<Pixel>> {
    let (w, h) = (image.width(), image.height());
    let mut seen = vec![false; w * h];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || !image.bits()[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(idx) = stack.pop() {
            members.push(idx);
            let (x, y) = ((idx % w) as isize, (idx / w) as isize);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let n = ny as usize * w + nx as usize;
                if image.bits()[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        members.sort_unstable();
        components.push(members.into_iter().map(|i| (i % w, i / w)).collect());
    }
    components
}

/// Centroid `(x, y)` and area of a spot.
///
/// Without weights every pixel counts once (a binarized spot). With weights the
/// centroid is `(M10 / M00, M01 / M00)` where `Mjk = sum w * x^j * y^k`.
pub fn spot_centroid(pixels: &[Pixel], weights: Option<&[f64]>) -> Result<(f64, f64, usize)> {
    if pixels.is_empty() {
        return Err(Error::InvalidArgument("empty pixel list".into()));
    }
    let (mut m00, mut m10, mut m01) = (0.0, 0.0, 0.0);
    match weights {
        None => {
            for &(x, y) in pixels {
                m00 += 1.0;
                m10 += x as f64;
                m01 += y as f64;
            }
        }
        Some(weights) => {
            if weights.len() != pixels.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} weights for {} pixels",
                    weights.len(),
                    pixels.len()
                )));
            }
            for (&(x, y), &w) in pixels.iter().zip(weights) {
                m00 += w;
                m10 += w * x as f64;
                m01 += w * y as f64;
            }
            if m00 <= 0.0 {
                return Err(Error::InvalidArgument("total spot weight must be positive".into()));
            }
        }
    }
    Ok((m10 / m00, m01 / m00, pixels.len()))
}

/// A detected spot on one intensity level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotRecord {
    pub level: usize,
    pub pixels: Vec<Pixel>,
    pub area: usize,
    pub centroid_x: f64,
    pub centroid_y: f64,
    /// Urn the centroid falls in; `None` when the containing pixel is outside the mask.
    pub urn: Option<u64>,
}

/// The occupied urns of one frame, strictly increasing, each in `1..=urn_count`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CentroidSet {
    frame_index: usize,
    urn_count: u64,
    occupied: Vec<u64>,
}

impl CentroidSet {
    pub fn new(frame_index: usize, urn_count: u64, occupied: Vec<u64>) -> Result<Self> {
        if occupied.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "occupied urns must be strictly increasing".into(),
            ));
        }
        if let (Some(&first), Some(&last)) = (occupied.first(), occupied.last()) {
            if first < 1 || last > urn_count {
                return Err(Error::InvalidArgument(format!(
                    "urn indices must lie in 1..={urn_count}"
                )));
            }
        }
        Ok(CentroidSet {
            frame_index,
            urn_count,
            occupied,
        })
    }

    /// Builds a set from arbitrary urn indices, sorting and dropping duplicates.
    /// Returns the set and the number of duplicates removed.
    pub fn from_unsorted(frame_index: usize, urn_count: u64, mut urns: Vec<u64>) -> Result<(Self, usize)> {
        let before = urns.len();
        urns.sort_unstable();
        urns.dedup();
        let collapsed = before - urns.len();
        Ok((CentroidSet::new(frame_index, urn_count, urns)?, collapsed))
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    /// Total urn count `N`.
    pub fn urn_count(&self) -> u64 {
        self.urn_count
    }

    pub fn occupied(&self) -> &[u64] {
        &self.occupied
    }

    /// Number of occupied urns `n_f`.
    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpotParams {
    pub min_area: usize,
    pub connectivity: Connectivity,
}

impl Default for SpotParams {
    fn default() -> Self {
        SpotParams {
            min_area: 2,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Full per-frame detection output.
#[derive(Debug, Clone)]
pub struct FrameSpots {
    pub set: CentroidSet,
    pub spots: Vec<SpotRecord>,
    pub duplicates_collapsed: usize,
    pub off_mask: usize,
}

/// Urn count for a mask and level spec: `levels * valid pixels`.
pub fn urn_count(mask: &PixelMask, spec: &LevelSpec) -> u64 {
    spec.level_count() as u64 * mask.pixel_count() as u64
}

/// Detects spots on every level and returns the occupied-urn set with diagnostics.
///
/// `mask` is used as given; erosion is the caller's job.
pub fn detect_spots(frame: &Frame, mask: &PixelMask, spec: &LevelSpec, params: SpotParams) -> Result<FrameSpots> {
    let levels = quantize_levels(frame, mask, spec)?;
    let ranks = mask.ranks();
    let per_level = mask.pixel_count() as u64;
    let mut spots = Vec::new();
    let mut urns = Vec::new();
    let mut off_mask = 0;
    for (li, image) in levels.iter().enumerate() {
        let level = li + 1;
        for pixels in connected_components(image, params.connectivity) {
            if pixels.len() < params.min_area.max(1) {
                continue;
            }
            let (cx, cy, area) = spot_centroid(&pixels, None)?;
            let (px, py) = (cx.floor() as usize, cy.floor() as usize);
            let urn = ranks[py * frame.width() + px].map(|r| li as u64 * per_level + u64::from(r));
            match urn {
                Some(u) => urns.push(u),
                None => off_mask += 1,
            }
            spots.push(SpotRecord {
                level,
                pixels,
                area,
                centroid_x: cx,
                centroid_y: cy,
                urn,
            });
        }
    }
    let (set, duplicates_collapsed) = CentroidSet::from_unsorted(frame.frame_index(), urn_count(mask, spec), urns)?;
    Ok(FrameSpots {
        set,
        spots,
        duplicates_collapsed,
        off_mask,
    })
}

/// Occupied-urn set of a frame.
pub fn extract_centroid_set(
    frame: &Frame,
    mask: &PixelMask,
    spec: &LevelSpec,
    params: SpotParams,
) -> Result<CentroidSet> {
    Ok(detect_spots(frame, mask, spec, params)?.set)
}

/// CSV debug line `frame,level,cx,cy,area,urn` for each spot; off-mask spots have an empty urn field.
pub fn spots_csv(frame_index: usize, spots: &[SpotRecord]) -> String {
    let mut out = String::new();
    for s in spots {
        let urn = s.urn.map(|u| u.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{frame_index},{},{},{},{},{urn}\n",
            s.level, s.centroid_x, s.centroid_y, s.area
        ));
    }
    out
}
