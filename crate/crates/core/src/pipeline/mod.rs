//! Batch extraction: frames in, packed bits and an audit report out.
//!
//! Frames are processed independently (in parallel) and their bit strings are
//! concatenated strictly in frame order. Bits are packed most significant
//! first; sub-byte remainders carry over to the next frame and only the final
//! partial byte is withheld from the bit file.

mod bitpack;
mod config;
mod report;

pub use bitpack::BitWriter;
pub use config::{parse_config_text, read_config_file, ConfigMap, InputSource, MaskSource, RunConfig, TestSelection};
pub use report::{Aggregate, AuditReport, Calibration, EntropySummary, FamilyCalibration, FrameRecord, ToolInfo};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::centroids::{detect_spots, spots_csv, urn_count, CentroidSet, SpotParams};
use crate::comb::{binomial, rank_of};
use crate::elias::{binary_entropy, elias_encode, BitString};
use crate::error::{Error, Result};
use crate::frame::{load_frame, Frame, LevelSpec, PixelMask};
use crate::sim::{gen_oracle_set, gen_speckle_frame, ground_truth_csv, SimMode};
use crate::stats::{
    autocorrelation_test, binomial_band, chi_square_bytes, empirical_min_entropy, expected_min_entropy, frequency_test,
    ks_uniform, serial_test, unpack_bits, ByteHistogram, TestResult, ALPHA_99, ALPHA_999, MAX_LAG,
};

/// Serial test variants in the suite: 2-bit, overlapping 2-bit, 3-bit words.
pub const SERIAL_VARIANTS: [(usize, bool); 3] = [(2, false), (2, true), (3, false)];

/// In-memory result of a run.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// Complete bytes, as written to the bit file.
    pub bytes: Vec<u8>,
    pub withheld: BitString,
    pub report: AuditReport,
    /// Per-spot debug CSV (image inputs only).
    pub spots_csv: String,
    /// Planted spot CSV (speckle simulator only).
    pub truth_csv: String,
}

/// Elias bit string of a configuration's rank.
pub fn encode_set(set: &CentroidSet) -> BitString {
    let rank = rank_of(set.urn_count(), set.occupied());
    let total = binomial(set.urn_count(), set.len() as u64);
    elias_encode(&rank, &total).expect("rank is below C(N, n)")
}

struct FrameOutcome {
    record: FrameRecord,
    bits: BitString,
    spots_csv: String,
    truth_csv: String,
}

fn outcome(set: &CentroidSet, duplicates: usize, off_mask: usize) -> FrameOutcome {
    let bits = encode_set(set);
    FrameOutcome {
        record: FrameRecord {
            frame_index: set.frame_index() as u64,
            occupied: set.len() as u64,
            urns: set.urn_count(),
            bits_emitted: bits.len() as u64,
            duplicates_collapsed: duplicates as u64,
            spots_off_mask: off_mask as u64,
        },
        bits,
        spots_csv: String::new(),
        truth_csv: String::new(),
    }
}

struct ImageContext {
    mask: PixelMask,
    spec: LevelSpec,
    params: SpotParams,
    width: usize,
    height: usize,
}

impl ImageContext {
    fn new(config: &RunConfig, width: usize, height: usize, bit_depth: u8, warnings: &mut Vec<String>) -> Result<Self> {
        let base = match &config.mask {
            MaskSource::Full => PixelMask::full(width, height),
            MaskSource::Path(path) => PixelMask::load(path)?,
        };
        if base.width() != width || base.height() != height {
            return Err(Error::Config(format!(
                "mask is {}x{} but frames are {width}x{height}",
                base.width(),
                base.height()
            )));
        }
        let mask = base.erode(config.erode);
        if mask.pixel_count() == 0 {
            warnings.push(format!("mask is empty after erosion with radius {}", config.erode));
        }
        Ok(ImageContext {
            mask,
            spec: LevelSpec::equal_width(config.levels, config.noise_floor, bit_depth)?,
            params: SpotParams {
                min_area: config.min_area,
                connectivity: config.connectivity(),
            },
            width,
            height,
        })
    }

    fn process(&self, frame: &Frame) -> Result<FrameOutcome> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(Error::Frame {
                frame_index: frame.frame_index(),
                message: format!(
                    "dimension mismatch: {}x{} instead of {}x{}",
                    frame.width(),
                    frame.height(),
                    self.width,
                    self.height
                ),
            });
        }
        let spots = detect_spots(frame, &self.mask, &self.spec, self.params)?;
        let mut out = outcome(&spots.set, spots.duplicates_collapsed, spots.off_mask);
        out.spots_csv = spots_csv(frame.frame_index(), &spots.spots);
        Ok(out)
    }
}

fn frame_paths(pattern: &str) -> Result<Vec<PathBuf>> {
    let mut paths = glob::glob(pattern)
        .map_err(|e| Error::Config(format!("bad frame glob {pattern:?}: {e}")))?
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| {
            let path = e.path().to_path_buf();
            Error::io(path, e.into())
        })?;
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!("no frames match {pattern:?}")));
    }
    Ok(paths)
}

fn frame_error(frame_index: usize, e: Error) -> Error {
    match e {
        Error::Frame { .. } => e,
        other => Error::Frame {
            frame_index,
            message: other.to_string(),
        },
    }
}

fn process_inputs(config: &RunConfig, warnings: &mut Vec<String>) -> Result<Vec<FrameOutcome>> {
    match &config.input {
        InputSource::Frames(pattern) => {
            let paths = frame_paths(pattern)?;
            let first = crate::frame::decode_frame(
                &std::fs::read(&paths[0]).map_err(|e| frame_error(0, Error::io(&paths[0], e)))?,
                0,
            )
            .map_err(|e| frame_error(0, e))?;
            let ctx = ImageContext::new(config, first.width(), first.height(), first.bit_depth(), warnings)?;
            let depth = first.bit_depth();
            paths
                .par_iter()
                .enumerate()
                .map(|(i, path)| {
                    let frame = load_frame(path, depth, i).map_err(|e| frame_error(i, e))?;
                    ctx.process(&frame)
                })
                .collect()
        }
        InputSource::Simulate(sim) if sim.mode == SimMode::Speckle => {
            let ctx = ImageContext::new(config, sim.width, sim.height, sim.bit_depth, warnings)?;
            (0..sim.frame_count)
                .into_par_iter()
                .map(|i| {
                    let (frame, planted) = gen_speckle_frame(sim, i)?;
                    let mut out = ctx.process(&frame)?;
                    out.truth_csv = ground_truth_csv(i, &planted);
                    Ok(out)
                })
                .collect()
        }
        InputSource::Simulate(sim) => {
            let urns = match sim.urns {
                Some(n) => n,
                None => {
                    let ctx = ImageContext::new(config, sim.width, sim.height, sim.bit_depth, warnings)?;
                    urn_count(&ctx.mask, &ctx.spec)
                }
            };
            (0..sim.frame_count)
                .into_par_iter()
                .map(|i| {
                    let set = gen_oracle_set(sim, urns, i)?;
                    Ok(outcome(&set, 0, 0))
                })
                .collect()
        }
    }
}

/// Runs the extraction in memory.
pub fn extract(config: &RunConfig) -> Result<Extraction> {
    config.validate()?;
    let mut warnings = Vec::new();
    let outcomes = process_inputs(config, &mut warnings)?;
    Ok(assemble(config, outcomes, warnings))
}

/// Runs the bit assembly and audit on centroid sets that are already known,
/// one per frame in order. The input source of `config` is only echoed.
pub fn extract_sets(config: &RunConfig, sets: &[CentroidSet]) -> Result<Extraction> {
    config.validate()?;
    let outcomes = sets.par_iter().map(|set| outcome(set, 0, 0)).collect();
    Ok(assemble(config, outcomes, Vec::new()))
}

fn assemble(config: &RunConfig, outcomes: Vec<FrameOutcome>, mut warnings: Vec<String>) -> Extraction {
    let mut writer = BitWriter::new();
    let mut frames = Vec::with_capacity(outcomes.len());
    let mut spots = String::new();
    let mut truth = String::new();
    for out in outcomes {
        writer.extend(&out.bits);
        frames.push(out.record);
        spots.push_str(&out.spots_csv);
        truth.push_str(&out.truth_csv);
    }
    let total_bits = writer.bit_len() as u64;
    let (bytes, withheld) = writer.finish();

    let aggregate = aggregate(&frames, total_bits, bytes.len() as u64, &withheld);
    if total_bits == 0 {
        warnings.push("no bits were emitted".into());
    }
    let audit = audit_bytes(&bytes, config.tests, config.block_bits, &mut warnings);

    let report = AuditReport {
        tool: ToolInfo::default(),
        config: config.clone(),
        frames,
        aggregate,
        tests: audit.tests,
        calibration: audit.calibration,
        entropy: audit.entropy,
        warnings,
    };
    Extraction {
        bytes,
        withheld,
        report,
        spots_csv: spots,
        truth_csv: truth,
    }
}

/// Runs the extraction and writes the bit file, report and optional CSV dumps.
pub fn run_extraction(config: &RunConfig) -> Result<AuditReport> {
    let extraction = extract(config)?;
    write_file(&config.out, &extraction.bytes)?;
    if let Some(path) = &config.report {
        emit_report(&extraction.report, path)?;
    }
    if let Some(path) = &config.spots_csv {
        let text = format!("frame,level,cx,cy,area,urn\n{}", extraction.spots_csv);
        write_file(path, text.as_bytes())?;
    }
    if let Some(path) = &config.truth_csv {
        let text = format!("frame,cx,cy,peak\n{}", extraction.truth_csv);
        write_file(path, text.as_bytes())?;
    }
    Ok(extraction.report)
}

pub fn emit_report(report: &AuditReport, path: impl AsRef<Path>) -> Result<()> {
    report.write(path)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn aggregate(frames: &[FrameRecord], total_bits: u64, bytes_written: u64, withheld: &BitString) -> Aggregate {
    let frame_count = frames.len() as u64;
    let occupied: u64 = frames.iter().map(|f| f.occupied).sum();
    let urns: u64 = frames.iter().map(|f| f.urns).sum();
    let occupancy = if urns > 0 { occupied as f64 / urns as f64 } else { 0.0 };
    Aggregate {
        frame_count,
        total_bits,
        bytes_written,
        withheld_bits: withheld.len() as u64,
        withheld_pattern: withheld.to_string(),
        mean_bits_per_frame: if frame_count > 0 {
            total_bits as f64 / frame_count as f64
        } else {
            0.0
        },
        zero_length_frames: frames.iter().filter(|f| f.bits_emitted == 0).count() as u64,
        duplicates_collapsed: frames.iter().map(|f| f.duplicates_collapsed).sum(),
        spots_off_mask: frames.iter().map(|f| f.spots_off_mask).sum(),
        occupancy,
        binary_entropy: binary_entropy(occupancy).unwrap_or(0.0),
        efficiency: if urns > 0 { total_bits as f64 / urns as f64 } else { 0.0 },
    }
}

/// Output of [`audit_bytes`].
#[derive(Debug, Clone, Default)]
pub struct Audit {
    pub tests: Vec<TestResult>,
    pub calibration: Option<Calibration>,
    pub entropy: Option<EntropySummary>,
}

/// Runs the selected tests on one bit string; tests whose minimum length is not
/// met are skipped.
fn run_tests(bits: &[bool], bytes: &[u8], selection: TestSelection) -> Vec<TestResult> {
    let mut results = Vec::new();
    if selection.frequency {
        results.extend(frequency_test(bits).ok());
    }
    if selection.autocorrelation {
        results.extend((1..=MAX_LAG).filter_map(|d| autocorrelation_test(bits, d).ok()));
    }
    if selection.serial {
        results.extend(
            SERIAL_VARIANTS
                .iter()
                .filter_map(|&(w, o)| serial_test(bits, w, o).ok()),
        );
    }
    if selection.chi_square {
        results.extend(chi_square_bytes(&ByteHistogram::from_bytes(bytes)).ok());
    }
    results
}

/// Test family of a result name: every autocorrelation lag is one family.
fn family(name: &str) -> &str {
    if name.starts_with("autocorrelation") {
        "autocorrelation"
    } else {
        name
    }
}

/// Whole-stream tests, per-block calibration and min-entropy for a packed stream.
pub fn audit_bytes(bytes: &[u8], selection: TestSelection, block_bits: usize, warnings: &mut Vec<String>) -> Audit {
    let bits = unpack_bits(bytes);
    let tests = run_tests(&bits, bytes, selection);
    if selection.any() && tests.is_empty() && !bits.is_empty() {
        warnings.push(format!(
            "stream of {} bits too short for the selected tests",
            bits.len()
        ));
    }

    let block_bytes = block_bits / 8;
    let blocks = bytes.len() / block_bytes.max(1);
    let calibration = (blocks > 0 && selection.any()).then(|| {
        let per_block: Vec<Vec<TestResult>> = bytes
            .par_chunks_exact(block_bytes)
            .map(|chunk| run_tests(&unpack_bits(chunk), chunk, selection))
            .collect();
        let mut names: Vec<&str> = Vec::new();
        for r in per_block.iter().flatten() {
            let f = family(&r.name);
            if !names.contains(&f) {
                names.push(f);
            }
        }
        let families = names
            .into_iter()
            .map(|name| {
                let p: Vec<f64> = per_block
                    .iter()
                    .flatten()
                    .filter(|r| family(&r.name) == name)
                    .map(|r| r.p_value)
                    .collect();
                let trials = p.len() as u64;
                let failures_99 = p.iter().filter(|&&v| v < ALPHA_99).count() as u64;
                let failures_999 = p.iter().filter(|&&v| v < ALPHA_999).count() as u64;
                let band_99 = binomial_band(trials, ALPHA_99);
                let band_999 = binomial_band(trials, ALPHA_999);
                let pass = band_99.contains(failures_99) && band_999.contains(failures_999);
                FamilyCalibration {
                    name: name.to_string(),
                    trials,
                    failures_99,
                    failures_999,
                    band_99,
                    band_999,
                    ks_p_value: ks_uniform(&p).1,
                    pass,
                }
            })
            .collect();
        Calibration {
            block_bits: (block_bytes * 8) as u64,
            blocks: blocks as u64,
            families,
        }
    });

    let entropy = if selection.min_entropy && bytes.len() >= 256 {
        let hist = ByteHistogram::from_bytes(bytes);
        match (empirical_min_entropy(&hist), expected_min_entropy(bytes.len() as u64)) {
            (Ok(empirical), Ok(expected)) => Some(EntropySummary {
                compatible: (empirical - expected.h_min).abs() <= 3.0 * expected.sigma_h_min,
                empirical_min_entropy: empirical,
                expected,
            }),
            _ => None,
        }
    } else {
        None
    };

    Audit {
        tests,
        calibration,
        entropy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SimConfig;

    fn oracle_config(frames: usize, urns: u64, mean: f64) -> RunConfig {
        let sim = SimConfig {
            mode: SimMode::Oracle,
            urns: Some(urns),
            spot_count_mean: mean,
            frame_count: frames,
            seed: 7,
            ..SimConfig::default()
        };
        RunConfig::new(InputSource::Simulate(sim))
    }

    #[test]
    fn worked_example_packs_one_byte() {
        let set = CentroidSet::new(0, 20, vec![2, 9, 13, 19]).unwrap();
        let mut config = oracle_config(1, 20, 4.0);
        config.tests = TestSelection::NONE;
        let x = extract_sets(&config, &[set]).unwrap();
        assert_eq!(x.bytes, vec![0b1100_1010]);
        assert_eq!(x.withheld.to_string(), "1111");
        let a = &x.report.aggregate;
        assert_eq!((a.total_bits, a.bytes_written, a.withheld_bits), (12, 1, 4));
        assert_eq!(a.withheld_pattern, "1111");
    }

    #[test]
    fn remainders_carry_across_frames() {
        // two 12-bit frames make exactly three bytes, nothing withheld
        let set = CentroidSet::new(0, 20, vec![2, 9, 13, 19]).unwrap();
        let second = CentroidSet::new(1, 20, vec![2, 9, 13, 19]).unwrap();
        let mut config = oracle_config(2, 20, 4.0);
        config.tests = TestSelection::NONE;
        let x = extract_sets(&config, &[set, second]).unwrap();
        assert_eq!(x.bytes, vec![0b1100_1010, 0b1111_1100, 0b1010_1111]);
        assert!(x.withheld.is_empty());
    }

    #[test]
    fn zero_spot_video_is_empty() {
        let sim = SimConfig {
            width: 64,
            height: 48,
            spot_count_mean: 0.0,
            frame_count: 3,
            ..SimConfig::default()
        };
        let x = extract(&RunConfig::new(InputSource::Simulate(sim))).unwrap();
        assert!(x.bytes.is_empty());
        assert_eq!(x.report.aggregate.total_bits, 0);
        assert_eq!(x.report.aggregate.zero_length_frames, 3);
        assert!(x.report.tests.is_empty());
        assert!(x.report.warnings.iter().any(|w| w.contains("no bits")));
    }

    #[test]
    fn runs_are_deterministic_and_consistent() {
        let config = oracle_config(20, 50_000, 300.0);
        let a = extract(&config).unwrap();
        let b = extract(&config).unwrap();
        assert_eq!(a.bytes, b.bytes);
        let json = a.report.to_json().unwrap();
        assert_eq!(json, b.report.to_json().unwrap());
        let parsed = AuditReport::from_json(&json).unwrap();
        assert_eq!(parsed.to_json().unwrap(), json);
        assert_eq!(parsed, a.report);

        let sum: u64 = a.report.frames.iter().map(|f| f.bits_emitted).sum();
        let agg = &a.report.aggregate;
        assert_eq!(sum, agg.total_bits);
        assert_eq!(agg.bytes_written * 8 + agg.withheld_bits, agg.total_bits);
        assert_eq!(a.bytes.len() as u64, agg.bytes_written);
    }

    #[test]
    fn parallel_merge_matches_sequential() {
        let config = oracle_config(12, 10_000, 80.0);
        let x = extract(&config).unwrap();
        let InputSource::Simulate(sim) = &config.input else {
            unreachable!()
        };
        let mut writer = BitWriter::new();
        for i in 0..sim.frame_count {
            writer.extend(&encode_set(&gen_oracle_set(sim, 10_000, i).unwrap()));
        }
        assert_eq!(writer.finish().0, x.bytes);
    }

    #[test]
    fn report_rejects_missing_key_and_bad_totals() {
        let config = oracle_config(2, 1000, 30.0);
        let json = extract(&config).unwrap().report.to_json().unwrap();

        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["aggregate"].as_object_mut().unwrap().remove("total_bits");
        assert!(AuditReport::from_json(&value.to_string()).is_err());

        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["aggregate"]["total_bits"] = serde_json::json!(1);
        assert!(AuditReport::from_json(&value.to_string()).is_err());

        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["extra"] = serde_json::json!(0);
        assert!(AuditReport::from_json(&value.to_string()).is_err());
    }

    #[test]
    fn mismatched_frame_names_its_index() {
        let dir = tempfile::tempdir().unwrap();
        let a = Frame::blank(8, 8, 8, 0).unwrap();
        let b = Frame::blank(8, 9, 8, 1).unwrap();
        crate::frame::save_frame(dir.path().join("f0.pgm"), &a, crate::frame::FrameFormat::Pgm).unwrap();
        crate::frame::save_frame(dir.path().join("f1.pgm"), &b, crate::frame::FrameFormat::Pgm).unwrap();
        let glob = dir.path().join("*.pgm").to_string_lossy().into_owned();
        let mut config = RunConfig::new(InputSource::Frames(glob));
        config.erode = 0;
        match extract(&config) {
            Err(Error::Frame { frame_index, .. }) => assert_eq!(frame_index, 1),
            other => panic!("expected a frame error, got {other:?}"),
        }
    }
}
