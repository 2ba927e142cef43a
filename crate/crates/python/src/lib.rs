//! Python bindings: ranking, Elias coding, frame extraction, the simulator and
//! the batch pipeline.

use num_bigint::BigUint;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use speckle_trng::centroids::detect_spots;
use speckle_trng::frame::{load_frame, save_frame, FrameFormat};
use speckle_trng::pipeline::{extract, parse_config_text, RunConfig};
use speckle_trng::sim::{gen_speckle_frame, uniform_centroid_set, SimConfig, SimMode};
use speckle_trng::stats::expected_min_entropy as min_entropy_model;
use speckle_trng::{comb, elias, BitString, Connectivity, Error, LevelSpec, PixelMask, SpotParams};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// An occupied-urn configuration.
#[pyclass(name = "CentroidSet", module = "speckle_trng", frozen)]
#[derive(Clone)]
struct PyCentroidSet {
    inner: speckle_trng::CentroidSet,
}

#[pymethods]
impl PyCentroidSet {
    #[new]
    #[pyo3(signature = (urn_count, occupied, frame_index = 0))]
    fn new(urn_count: u64, occupied: Vec<u64>, frame_index: usize) -> PyResult<Self> {
        let inner = speckle_trng::CentroidSet::new(frame_index, urn_count, occupied).map_err(py_err)?;
        Ok(PyCentroidSet { inner })
    }

    /// Uniformly random `n`-subset of `1..=N`.
    #[staticmethod]
    fn uniform(urn_count: u64, occupied: u64, seed: u64) -> PyResult<Self> {
        let inner = uniform_centroid_set(urn_count, occupied, seed).map_err(py_err)?;
        Ok(PyCentroidSet { inner })
    }

    /// Inverse of `rank`.
    #[staticmethod]
    fn unrank(rank: BigUint, urn_count: u64, occupied: u64) -> PyResult<Self> {
        let inner = comb::lex_unrank(&rank, urn_count, occupied).map_err(py_err)?;
        Ok(PyCentroidSet { inner })
    }

    #[getter]
    fn urn_count(&self) -> u64 {
        self.inner.urn_count()
    }

    #[getter]
    fn occupied(&self) -> Vec<u64> {
        self.inner.occupied().to_vec()
    }

    #[getter]
    fn frame_index(&self) -> usize {
        self.inner.frame_index()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Lexicographic rank `I(S)`: the number of configurations after this one.
    fn rank(&self) -> BigUint {
        comb::lex_rank(&self.inner).rank
    }

    fn total(&self) -> BigUint {
        comb::binomial(self.inner.urn_count(), self.inner.len() as u64)
    }

    fn predecessors(&self) -> BigUint {
        comb::predecessor_count(&self.inner)
    }

    /// The unbiased bits extracted from this configuration, as a `0`/`1` string.
    fn bits(&self) -> String {
        speckle_trng::pipeline::encode_set(&self.inner).to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "CentroidSet(urn_count={}, occupied={} urns, frame_index={})",
            self.inner.urn_count(),
            self.inner.len(),
            self.inner.frame_index()
        )
    }
}

/// A grayscale frame.
#[pyclass(name = "Frame", module = "speckle_trng", frozen)]
struct PyFrame {
    inner: speckle_trng::Frame,
}

#[pymethods]
impl PyFrame {
    #[new]
    #[pyo3(signature = (width, height, bit_depth, samples, frame_index = 0))]
    fn new(width: usize, height: usize, bit_depth: u8, samples: Vec<u16>, frame_index: usize) -> PyResult<Self> {
        let inner = speckle_trng::Frame::new(width, height, bit_depth, samples, frame_index).map_err(py_err)?;
        Ok(PyFrame { inner })
    }

    /// Loads a P5 or TRNGFRM1 file of the given depth.
    #[staticmethod]
    #[pyo3(signature = (path, bit_depth, frame_index = 0))]
    fn load(path: std::path::PathBuf, bit_depth: u8, frame_index: usize) -> PyResult<Self> {
        let inner = load_frame(path, bit_depth, frame_index).map_err(py_err)?;
        Ok(PyFrame { inner })
    }

    /// Writes the frame as `pgm` or `raw`.
    #[pyo3(signature = (path, format = "pgm"))]
    fn save(&self, path: std::path::PathBuf, format: &str) -> PyResult<()> {
        let format = match format {
            "pgm" => FrameFormat::Pgm,
            "raw" => FrameFormat::Raw,
            other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
        };
        save_frame(path, &self.inner, format).map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn bit_depth(&self) -> u8 {
        self.inner.bit_depth()
    }

    #[getter]
    fn frame_index(&self) -> usize {
        self.inner.frame_index()
    }

    /// Row-major samples.
    fn samples(&self) -> Vec<u16> {
        self.inner.samples().to_vec()
    }

    /// Occupied urns of the frame, plus the count of collapsed duplicates and
    /// of centroids that fell off the mask.
    #[pyo3(signature = (mask = None, erode = 2, levels = 8, noise_floor = 1, min_area = 2, connectivity = 8))]
    fn centroids(
        &self,
        mask: Option<std::path::PathBuf>,
        erode: usize,
        levels: usize,
        noise_floor: u32,
        min_area: usize,
        connectivity: u8,
    ) -> PyResult<(PyCentroidSet, usize, usize)> {
        let f = &self.inner;
        let base = match mask {
            Some(path) => PixelMask::load(path).map_err(py_err)?,
            None => PixelMask::full(f.width(), f.height()),
        };
        let mask = base.erode(erode);
        let spec = LevelSpec::equal_width(levels, noise_floor, f.bit_depth()).map_err(py_err)?;
        let connectivity: Connectivity = connectivity.to_string().parse().map_err(py_err)?;
        let params = SpotParams { min_area, connectivity };
        let spots = detect_spots(f, &mask, &spec, params).map_err(py_err)?;
        Ok((
            PyCentroidSet { inner: spots.set },
            spots.duplicates_collapsed,
            spots.off_mask,
        ))
    }
}

#[pyfunction]
fn total_combinations(urn_count: u64, occupied: u64) -> PyResult<BigUint> {
    comb::total_combinations(urn_count, occupied).map_err(py_err)
}

/// `I(S) = sum_k C(N - s_k, n - k + 1)` for sorted 1-based urns.
#[pyfunction]
fn lex_rank(occupied: Vec<u64>, urn_count: u64) -> PyResult<BigUint> {
    let set = speckle_trng::CentroidSet::new(0, urn_count, occupied).map_err(py_err)?;
    Ok(comb::lex_rank(&set).rank)
}

#[pyfunction]
fn lex_unrank(rank: BigUint, urn_count: u64, occupied: u64) -> PyResult<Vec<u64>> {
    Ok(comb::lex_unrank(&rank, urn_count, occupied)
        .map_err(py_err)?
        .occupied()
        .to_vec())
}

#[pyfunction]
fn elias_encode(rank: BigUint, total: BigUint) -> PyResult<String> {
    Ok(elias::elias_encode(&rank, &total).map_err(py_err)?.to_string())
}

#[pyfunction]
fn elias_decode(bits: &str, total: BigUint) -> PyResult<BigUint> {
    let bits: BitString = bits.parse().map_err(py_err)?;
    elias::elias_decode(&bits, &total).map_err(py_err)
}

#[pyfunction]
fn binary_entropy(q: f64) -> PyResult<f64> {
    elias::binary_entropy(q).map_err(py_err)
}

/// `(mean_length, eta, h2, gap)` of the Elias code for `n` balls in `N` urns.
#[pyfunction]
fn expected_efficiency(urn_count: u64, occupied: u64) -> PyResult<(f64, f64, f64, f64)> {
    let e = elias::expected_efficiency(urn_count, occupied).map_err(py_err)?;
    Ok((e.mean_length, e.eta, e.entropy, e.gap))
}

/// `(h_min, sigma_h_min, mean_max_count, sigma_max_count)` for `L` uniform bytes.
#[pyfunction]
fn expected_min_entropy(sample_bytes: u64) -> PyResult<(f64, f64, f64, f64)> {
    let m = min_entropy_model(sample_bytes).map_err(py_err)?;
    Ok((m.h_min, m.sigma_h_min, m.mean_max_count, m.sigma_max_count))
}

/// One simulated speckle frame and its planted `(x, y, peak)` spots.
#[pyfunction]
#[pyo3(signature = (frame_index = 0, *, width = 640, height = 480, bit_depth = 8, spots = 200.0, sigma = 1.5,
                    peak_min = 64.0, peak_max = 255.0, noise = 0.0, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate_frame(
    frame_index: usize,
    width: usize,
    height: usize,
    bit_depth: u8,
    spots: f64,
    sigma: f64,
    peak_min: f64,
    peak_max: f64,
    noise: f64,
    seed: u64,
) -> PyResult<(PyFrame, Vec<(f64, f64, f64)>)> {
    let config = SimConfig {
        width,
        height,
        bit_depth,
        spot_count_mean: spots,
        spot_sigma: sigma,
        intensity_min: peak_min,
        intensity_max: peak_max,
        background_noise_sigma: noise,
        seed,
        mode: SimMode::Speckle,
        frame_count: frame_index + 1,
        urns: None,
    };
    let (frame, planted) = gen_speckle_frame(&config, frame_index).map_err(py_err)?;
    let planted = planted.iter().map(|s| (s.x, s.y, s.peak)).collect();
    Ok((PyFrame { inner: frame }, planted))
}

fn config_from_text(text: &str) -> PyResult<RunConfig> {
    RunConfig::from_map(&parse_config_text(text).map_err(py_err)?).map_err(py_err)
}

/// Runs the pipeline from `key = value` config text (the CLI's config format)
/// and returns `(bytes, withheld_bits, report_json)` without touching disk.
#[pyfunction]
fn extract_bits(py: Python<'_>, config: &str) -> PyResult<(Vec<u8>, String, String)> {
    let config = config_from_text(config)?;
    let x = py.allow_threads(|| extract(&config)).map_err(py_err)?;
    let json = x.report.to_json().map_err(py_err)?;
    Ok((x.bytes, x.withheld.to_string(), json))
}

/// Runs the pipeline from config text, writing the bit file and any report or
/// CSV paths it names; returns the report JSON.
#[pyfunction]
fn run_extraction(py: Python<'_>, config: &str) -> PyResult<String> {
    let config = config_from_text(config)?;
    let report = py
        .allow_threads(|| speckle_trng::pipeline::run_extraction(&config))
        .map_err(py_err)?;
    report.to_json().map_err(py_err)
}

#[pymodule]
#[pyo3(name = "speckle_trng")]
fn speckle_trng_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCentroidSet>()?;
    m.add_class::<PyFrame>()?;
    m.add_function(wrap_pyfunction!(total_combinations, m)?)?;
    m.add_function(wrap_pyfunction!(lex_rank, m)?)?;
    m.add_function(wrap_pyfunction!(lex_unrank, m)?)?;
    m.add_function(wrap_pyfunction!(elias_encode, m)?)?;
    m.add_function(wrap_pyfunction!(elias_decode, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(expected_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(expected_min_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_frame, m)?)?;
    m.add_function(wrap_pyfunction!(extract_bits, m)?)?;
    m.add_function(wrap_pyfunction!(run_extraction, m)?)?;
    Ok(())
}
