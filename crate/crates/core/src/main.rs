use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use speckle_trng::frame::{save_frame, FrameFormat};
use speckle_trng::pipeline::{read_config_file, run_extraction, AuditReport, ConfigMap, InputSource, RunConfig};
use speckle_trng::sim::{gen_speckle_frame, ground_truth_csv, SimMode};

/// Extract unbiased random bits from speckle-pattern frames.
#[derive(Parser, Debug)]
#[command(version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write simulated speckle frames to disk.
    GenFrames {
        /// Simulator config file (key = value).
        #[arg(long)]
        simulate: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Pgm)]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        /// Planted spot centres, CSV `frame,cx,cy,peak`.
        #[arg(long)]
        truth_csv: Option<PathBuf>,
    },
    /// Parse a report and check its internal consistency.
    ValidateReport { path: PathBuf },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Pgm,
    Raw,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Glob of P5 / TRNGFRM1 frame files, processed in sorted order.
    #[arg(long, conflicts_with = "simulate")]
    frames: Option<String>,
    /// Simulator config file (key = value); other keys in it act as defaults for the flags below.
    #[arg(long)]
    simulate: Option<PathBuf>,
    /// Mask image path, or `full`.
    #[arg(long)]
    mask: Option<String>,
    /// Edge erosion radius in pixels [default: 2].
    #[arg(long)]
    erode: Option<usize>,
    /// Number of intensity sub-levels [default: 8].
    #[arg(long)]
    levels: Option<usize>,
    /// Samples below this intensity belong to no level [default: 1].
    #[arg(long)]
    noise_floor: Option<u32>,
    /// Smallest spot area in pixels [default: 2].
    #[arg(long)]
    min_area: Option<usize>,
    /// Pixel adjacency, 4 or 8 [default: 8].
    #[arg(long)]
    connectivity: Option<u8>,
    /// Packed output bits [default: bits.bin].
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON audit report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// `all`, `none`, or a comma list of frequency, autocorrelation, serial, chi-square, min-entropy.
    #[arg(long)]
    tests: Option<String>,
    /// Simulator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sub-string length for the calibration pass [default: 20000].
    #[arg(long)]
    block_bits: Option<usize>,
    /// Per-spot debug CSV `frame,level,cx,cy,area,urn`.
    #[arg(long)]
    spots_csv: Option<PathBuf>,
    /// Planted spot CSV `frame,cx,cy,peak` (speckle simulator).
    #[arg(long)]
    truth_csv: Option<PathBuf>,
}

impl RunArgs {
    fn to_map(&self) -> speckle_trng::Result<ConfigMap> {
        let mut map = match &self.simulate {
            Some(path) => read_config_file(path)?,
            None => ConfigMap::new(),
        };
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        };
        let s = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string());
        put("frames", self.frames.clone());
        put("mask", self.mask.clone());
        put("erode", self.erode.map(|v| v.to_string()));
        put("levels", self.levels.map(|v| v.to_string()));
        put("noise-floor", self.noise_floor.map(|v| v.to_string()));
        put("min-area", self.min_area.map(|v| v.to_string()));
        put("connectivity", self.connectivity.map(|v| v.to_string()));
        put("out", s(&self.out));
        put("report", s(&self.report));
        put("tests", self.tests.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("block-bits", self.block_bits.map(|v| v.to_string()));
        put("spots-csv", s(&self.spots_csv));
        put("truth-csv", s(&self.truth_csv));
        Ok(map)
    }
}

fn run(cli: Cli) -> speckle_trng::Result<()> {
    match cli.command {
        Some(Command::GenFrames {
            simulate,
            out_dir,
            format,
            seed,
            truth_csv,
        }) => {
            let mut map = read_config_file(&simulate)?;
            if let Some(seed) = seed {
                map.insert("seed".into(), seed.to_string());
            }
            let config = RunConfig::from_map(&map)?;
            let InputSource::Simulate(sim) = config.input else {
                unreachable!("config file input is always the simulator");
            };
            if sim.mode != SimMode::Speckle {
                return Err(speckle_trng::Error::Config("gen-frames needs mode = speckle".into()));
            }
            std::fs::create_dir_all(&out_dir).map_err(|e| io_error(&out_dir, e))?;
            let format = match format {
                Format::Pgm => FrameFormat::Pgm,
                Format::Raw => FrameFormat::Raw,
            };
            let mut truth = String::from("frame,cx,cy,peak\n");
            for i in 0..sim.frame_count {
                let (frame, planted) = gen_speckle_frame(&sim, i)?;
                let path = out_dir.join(format!("frame_{i:06}.{}", format.extension()));
                save_frame(&path, &frame, format)?;
                truth.push_str(&ground_truth_csv(i, &planted));
            }
            if let Some(path) = truth_csv {
                std::fs::write(&path, truth).map_err(|e| io_error(&path, e))?;
            }
            eprintln!("wrote {} frames to {}", sim.frame_count, out_dir.display());
        }
        Some(Command::ValidateReport { path }) => {
            let report = AuditReport::read(&path)?;
            println!(
                "{}: ok ({} frames, {} bits)",
                path.display(),
                report.aggregate.frame_count,
                report.aggregate.total_bits
            );
        }
        None => {
            let config = RunConfig::from_map(&cli.run.to_map()?)?;
            let report = run_extraction(&config)?;
            let a = &report.aggregate;
            eprintln!(
                "{} frames, {} bits ({} bytes written, {} withheld), {:.1} bits/frame, q = {:.3e}, eta = {:.5} (h2 = {:.5})",
                a.frame_count,
                a.total_bits,
                a.bytes_written,
                a.withheld_bits,
                a.mean_bits_per_frame,
                a.occupancy,
                a.efficiency,
                a.binary_entropy
            );
            let failed: Vec<&str> = report
                .tests
                .iter()
                .filter(|t| !t.pass_99)
                .map(|t| t.name.as_str())
                .collect();
            eprintln!(
                "{} tests run, {} below 0.01: {:?}",
                report.tests.len(),
                failed.len(),
                failed
            );
            if let Some(cal) = &report.calibration {
                for f in &cal.families {
                    eprintln!(
                        "  {:<26} {:>6} trials  {:>4} @99% [{:.0}, {:.0}]  {:>3} @99.9% [{:.0}, {:.0}]  {}",
                        f.name,
                        f.trials,
                        f.failures_99,
                        f.band_99.lower,
                        f.band_99.upper,
                        f.failures_999,
                        f.band_999.lower,
                        f.band_999.upper,
                        if f.pass { "ok" } else { "FAIL" }
                    );
                }
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> speckle_trng::Error {
    speckle_trng::Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
