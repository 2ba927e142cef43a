//! Run configuration and the flat `key = value` config file format.
//!
//! Keys mirror the CLI flags (`erode`, `levels`, `noise-floor`, ...) plus the
//! simulator keys (`width`, `height`, `depth`, `spots`, `sigma`, `peak-min`,
//! `peak-max`, `noise`, `mode`, `frame-count`, `urns`, `seed`). `_` and `-` are
//! interchangeable in keys; `#` starts a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::centroids::Connectivity;
use crate::error::{Error, Result};
use crate::sim::{SimConfig, SimMode};

pub type ConfigMap = BTreeMap<String, String>;

const RUN_KEYS: &[&str] = &[
    "frames",
    "mask",
    "erode",
    "levels",
    "noise-floor",
    "min-area",
    "connectivity",
    "out",
    "report",
    "tests",
    "seed",
    "block-bits",
    "spots-csv",
    "truth-csv",
];
const SIM_KEYS: &[&str] = &[
    "width",
    "height",
    "depth",
    "spots",
    "sigma",
    "peak-min",
    "peak-max",
    "noise",
    "mode",
    "frame-count",
    "urns",
];

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parses `key = value` lines. Later keys override earlier ones.
pub fn parse_config_text(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = normalize_key(key);
        if !RUN_KEYS.contains(&key.as_str()) && !SIM_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", n + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: impl AsRef<Path>) -> Result<ConfigMap> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_text(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSource {
    /// Glob of frame files, processed in sorted path order.
    Frames(String),
    Simulate(SimConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskSource {
    Full,
    Path(PathBuf),
}

/// Which audit tests to run on the emitted stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSelection {
    pub frequency: bool,
    pub autocorrelation: bool,
    pub serial: bool,
    pub chi_square: bool,
    pub min_entropy: bool,
}

impl TestSelection {
    pub const ALL: TestSelection = TestSelection {
        frequency: true,
        autocorrelation: true,
        serial: true,
        chi_square: true,
        min_entropy: true,
    };
    pub const NONE: TestSelection = TestSelection {
        frequency: false,
        autocorrelation: false,
        serial: false,
        chi_square: false,
        min_entropy: false,
    };

    pub fn any(&self) -> bool {
        *self != TestSelection::NONE
    }
}

impl std::str::FromStr for TestSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all" => return Ok(TestSelection::ALL),
            "none" => return Ok(TestSelection::NONE),
            _ => {}
        }
        let mut sel = TestSelection::NONE;
        for name in s.split(',').map(str::trim) {
            match name {
                "frequency" => sel.frequency = true,
                "autocorrelation" => sel.autocorrelation = true,
                "serial" => sel.serial = true,
                "chi-square" | "chi_square" | "bytes" => sel.chi_square = true,
                "min-entropy" | "min_entropy" | "entropy" => sel.min_entropy = true,
                other => return Err(Error::Config(format!("unknown test {other:?}"))),
            }
        }
        Ok(sel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputSource,
    pub mask: MaskSource,
    pub erode: usize,
    pub levels: usize,
    pub noise_floor: u32,
    pub min_area: usize,
    pub connectivity: u8,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub tests: TestSelection,
    /// Sub-string length for the calibration pass (failure counts per block).
    pub block_bits: usize,
    pub spots_csv: Option<PathBuf>,
    pub truth_csv: Option<PathBuf>,
}

impl RunConfig {
    pub const DEFAULT_ERODE: usize = 2;
    pub const DEFAULT_BLOCK_BITS: usize = 20_000;

    /// A config with every default and the given input.
    pub fn new(input: InputSource) -> Self {
        RunConfig {
            input,
            mask: MaskSource::Full,
            erode: Self::DEFAULT_ERODE,
            levels: crate::frame::LevelSpec::DEFAULT_LEVELS,
            noise_floor: crate::frame::LevelSpec::DEFAULT_NOISE_FLOOR,
            min_area: 2,
            connectivity: 8,
            out: PathBuf::from("bits.bin"),
            report: None,
            tests: TestSelection::ALL,
            block_bits: Self::DEFAULT_BLOCK_BITS,
            spots_csv: None,
            truth_csv: None,
        }
    }

    /// Builds a config from merged key-value settings. Simulator keys select the
    /// simulator input; `frames` selects file input; having both is an error.
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let has_sim = map.keys().any(|k| SIM_KEYS.contains(&k.as_str()));
        let input = match (map.get("frames"), has_sim) {
            (Some(_), true) => return Err(Error::Config("both a frame glob and simulator settings given".into())),
            (Some(glob), false) => InputSource::Frames(glob.clone()),
            (None, true) => InputSource::Simulate(sim_from_map(map)?),
            (None, false) => return Err(Error::Config("no input: give --frames or --simulate".into())),
        };
        let mut config = RunConfig::new(input);
        if let Some(mask) = map.get("mask") {
            config.mask = if mask == "full" {
                MaskSource::Full
            } else {
                MaskSource::Path(PathBuf::from(mask))
            };
        }
        set(map, "erode", &mut config.erode)?;
        set(map, "levels", &mut config.levels)?;
        set(map, "noise-floor", &mut config.noise_floor)?;
        set(map, "min-area", &mut config.min_area)?;
        set(map, "connectivity", &mut config.connectivity)?;
        set(map, "block-bits", &mut config.block_bits)?;
        if let Some(v) = map.get("out") {
            config.out = PathBuf::from(v);
        }
        config.report = map.get("report").map(PathBuf::from);
        config.spots_csv = map.get("spots-csv").map(PathBuf::from);
        config.truth_csv = map.get("truth-csv").map(PathBuf::from);
        if let Some(v) = map.get("tests") {
            config.tests = v.parse()?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::Config("levels must be positive".into()));
        }
        if self.connectivity != 4 && self.connectivity != 8 {
            return Err(Error::Config(format!(
                "connectivity must be 4 or 8, got {}",
                self.connectivity
            )));
        }
        if self.block_bits < 1024 {
            return Err(Error::Config("block-bits must be at least 1024".into()));
        }
        if let InputSource::Simulate(sim) = &self.input {
            sim.validate()?;
        }
        Ok(())
    }

    pub fn connectivity(&self) -> Connectivity {
        if self.connectivity == 4 {
            Connectivity::Four
        } else {
            Connectivity::Eight
        }
    }
}

fn set<T: std::str::FromStr>(map: &ConfigMap, key: &str, slot: &mut T) -> Result<()> {
    if let Some(v) = map.get(key) {
        *slot = v
            .parse()
            .map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))?;
    }
    Ok(())
}

fn sim_from_map(map: &ConfigMap) -> Result<SimConfig> {
    let mut sim = SimConfig::default();
    set(map, "width", &mut sim.width)?;
    set(map, "height", &mut sim.height)?;
    set(map, "depth", &mut sim.bit_depth)?;
    set(map, "spots", &mut sim.spot_count_mean)?;
    set(map, "sigma", &mut sim.spot_sigma)?;
    set(map, "peak-min", &mut sim.intensity_min)?;
    set(map, "peak-max", &mut sim.intensity_max)?;
    set(map, "noise", &mut sim.background_noise_sigma)?;
    set(map, "seed", &mut sim.seed)?;
    set(map, "frame-count", &mut sim.frame_count)?;
    if let Some(mode) = map.get("mode") {
        sim.mode = mode.parse::<SimMode>()?;
    }
    if let Some(urns) = map.get("urns") {
        sim.urns = Some(
            urns.parse()
                .map_err(|_| Error::Config(format!("invalid value {urns:?} for urns")))?,
        );
    }
    Ok(sim)
}
