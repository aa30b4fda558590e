//! TOML run configuration.
//!
//! ```toml
//! seed = 1
//! pf_target = 1e-3
//! trials_h0 = 10000
//! trials_h1 = 10000
//! snr_grid_db = [-30.0, -25.0, -20.0]
//! detectors = ["AMR_GLRT", "PMR_RGLRT_K"]
//!
//! [scenario]
//! transmitters = 2
//! receivers = 3
//! dnr_db = -10.0
//!
//! [format]
//! kind = "linear"
//! rolloff = 0.22
//! M = 8
//! P = 64
//! L = 10
//! constellation = "bpsk"
//! ```
//!
//! Every transmitter uses the `format` block. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{Hypothesis, ScenarioConfig};
use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::montecarlo::ExperimentConfig;
use crate::waveform::{Constellation, LinearModFormat, OfdmFormat, SignalFormat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub seed: u64,
    pub pf_target: f64,
    pub trials_h0: usize,
    pub trials_h1: usize,
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "all_detectors")]
    pub detectors: Vec<DetectorKind>,
    pub scenario: ScenarioBlock,
    pub format: FormatBlock,
}

fn all_detectors() -> Vec<DetectorKind> {
    DetectorKind::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub transmitters: usize,
    pub receivers: usize,
    #[serde(default = "unit_variance")]
    pub sigma2: f64,
    pub dnr_db: f64,
    #[serde(default = "yes")]
    pub include_reference: bool,
}

fn unit_variance() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FormatBlock {
    Linear {
        rolloff: f64,
        #[serde(rename = "M")]
        span: usize,
        #[serde(rename = "P")]
        samples_per_symbol: usize,
        #[serde(rename = "L")]
        symbols: usize,
        constellation: String,
    },
    Ofdm {
        #[serde(rename = "Ns")]
        subcarriers: usize,
        #[serde(rename = "P")]
        samples_per_symbol: usize,
        #[serde(rename = "TgOverTsym", default)]
        guard_fraction: f64,
        #[serde(rename = "L")]
        symbols: usize,
        constellation: String,
    },
}

impl FormatBlock {
    pub fn to_format(&self) -> Result<SignalFormat> {
        match self {
            FormatBlock::Linear {
                rolloff,
                span,
                samples_per_symbol,
                symbols,
                constellation,
            } => Ok(SignalFormat::Linear(LinearModFormat::raised_cosine(
                *rolloff,
                *span,
                *samples_per_symbol,
                *symbols,
                parse_constellation(constellation)?,
            )?)),
            FormatBlock::Ofdm {
                subcarriers,
                samples_per_symbol,
                guard_fraction,
                symbols,
                constellation,
            } => Ok(SignalFormat::Ofdm(OfdmFormat::with_guard_fraction(
                *subcarriers,
                *samples_per_symbol,
                *guard_fraction,
                *symbols,
                parse_constellation(constellation)?,
            )?)),
        }
    }
}

fn parse_constellation(name: &str) -> Result<Constellation> {
    name.parse()
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            transmitters: self.scenario.transmitters,
            receivers: self.scenario.receivers,
            sigma2: self.scenario.sigma2,
            snr_db: self.snr_grid_db.first().copied().unwrap_or(0.0),
            dnr_db: self.scenario.dnr_db,
            hypothesis: Hypothesis::H1,
            include_reference: self.scenario.include_reference,
        }
    }

    /// Builds and validates the experiment.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let format = self.format.to_format()?;
        let config = ExperimentConfig {
            scenario: self.scenario(),
            formats: vec![format; self.scenario.transmitters],
            detectors: self.detectors.clone(),
            snr_grid_db: self.snr_grid_db.clone(),
            pf_target: self.pf_target,
            trials_h0: self.trials_h0,
            trials_h1: self.trials_h1,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}
