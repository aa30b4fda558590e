//! Command-line front end.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfigFile;
use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::io::{read_observations, write_curves};
use crate::montecarlo::{calibrate_thresholds, run_experiment, with_threads, RNG_ALGORITHM};
use crate::waveform::{raised_cosine_pulse, FormatModel};

#[derive(Debug, Parser)]
#[command(
    name = "passive-glrt",
    version,
    about = "GLRT target detectors for passive MIMO radar"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrate thresholds and sweep the SNR grid, writing curves.csv and
    /// manifest.json.
    Curve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Calibrate thresholds only and print them as CSV.
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate one detector on an observation file.
    Detect {
        /// Observation interchange CSV.
        observations: PathBuf,
        #[arg(long)]
        detector: DetectorKind,
        /// Run config supplying the signal format and noise variance.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Print raised-cosine pulse samples as CSV.
    Pulse {
        #[arg(long, allow_negative_numbers = true)]
        rolloff: f64,
        /// Pulse span in symbols.
        #[arg(long = "span", short = 'M')]
        span: usize,
        /// Samples per symbol.
        #[arg(long = "sps", short = 'P')]
        sps: usize,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Comma-separated detector names, overriding the config.
    #[arg(long, value_delimiter = ',')]
    pub detectors: Option<Vec<DetectorKind>>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfigFile> {
        let mut cfg = RunConfigFile::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(d) = &self.detectors {
            cfg.detectors = d.clone();
        }
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct Threshold {
    detector: DetectorKind,
    threshold: f64,
}

#[derive(Serialize)]
struct Failure {
    detector: DetectorKind,
    error: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    rng: &'static str,
    seed: u64,
    threads: usize,
    wall_time_s: f64,
    thresholds: Vec<Threshold>,
    failures: Vec<Failure>,
    config: &'a RunConfigFile,
}

/// Runs the parsed command and returns the process exit code: 0 on
/// success, 1 for bad input, 2 for numerical failures.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Curve { run, out } => curve(&run, &out),
        Command::Calibrate { run } => calibrate(&run),
        Command::Detect {
            observations,
            detector,
            config,
        } => detect(&observations, detector, &config),
        Command::Pulse { rolloff, span, sps } => pulse(rolloff, span, sps),
    }
}

fn curve(args: &RunArgs, out: &Path) -> Result<i32> {
    let cfg = args.load()?;
    let experiment = cfg.to_experiment()?;
    let start = Instant::now();
    let result = run_experiment(&experiment, args.threads)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(out)?;
    write_curves(
        &result.curves,
        BufWriter::new(File::create(out.join("curves.csv"))?),
    )?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        rng: RNG_ALGORITHM,
        seed: cfg.seed,
        threads: args.threads,
        wall_time_s,
        thresholds: result
            .curves
            .iter()
            .map(|c| Threshold {
                detector: c.detector,
                threshold: c.threshold,
            })
            .collect(),
        failures: result
            .failures
            .iter()
            .map(|(d, e)| Failure {
                detector: *d,
                error: e.to_string(),
            })
            .collect(),
        config: &cfg,
    };
    let mut w = BufWriter::new(File::create(out.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;

    for (d, e) in &result.failures {
        eprintln!("error: {d}: {e}");
    }
    Ok(if result.failures.is_empty() { 0 } else { 2 })
}

fn calibrate(args: &RunArgs) -> Result<i32> {
    let cfg = args.load()?;
    let experiment = cfg.to_experiment()?;
    let models = experiment.models();
    let thresholds = with_threads(args.threads, || calibrate_thresholds(&experiment, &models))?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "detector,threshold")?;
    let mut code = 0;
    for (d, t) in experiment.detectors.iter().zip(thresholds) {
        match t {
            Ok(t) => writeln!(w, "{d},{t}")?,
            Err(e) => {
                eprintln!("error: {d}: {e}");
                code = 2;
            }
        }
    }
    Ok(code)
}

fn detect(path: &Path, detector: DetectorKind, config: &Path) -> Result<i32> {
    let cfg = RunConfigFile::load(config)?;
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let obs = read_observations(BufReader::new(file))?;
    let format = cfg.format.to_format()?;
    let models = vec![FormatModel::new(format); obs.transmitters.len()];
    let xi = detector.evaluate(&models, &obs, cfg.scenario.sigma2)?;
    println!("{}", format_significant(xi, 12));
    Ok(0)
}

fn pulse(rolloff: f64, span: usize, sps: usize) -> Result<i32> {
    let samples = raised_cosine_pulse(rolloff, span, sps)?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "index,t,value")?;
    let center = (span * sps / 2) as f64;
    for (k, v) in samples.iter().enumerate() {
        writeln!(w, "{k},{},{v}", (k as f64 - center) / sps as f64)?;
    }
    Ok(0)
}

/// `x` rounded to `digits` significant digits, trailing zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_significant;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1.0, 12), "1");
        assert_eq!(format_significant(-2.5, 12), "-2.5");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(123456.7890123456, 12), "123456.789012");
        assert_eq!(format_significant(6.02214076e23, 12), "6.02214076e23");
        assert_eq!(format_significant(1.5e-7, 12), "1.5e-7");
    }
}
