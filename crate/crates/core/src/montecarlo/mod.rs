//! Threshold calibration and detection-probability estimation.
//!
//! Each trial simulates one set of observations and evaluates every
//! requested detector on it, so all detectors see the same random scenes.
//! Thresholds are calibrated once per detector from H0 trials and reused
//! across the SNR grid, since no H0 statistic depends on the surveillance
//! SNR.

mod rng;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{simulate_observation, Hypothesis, ScenarioConfig};
use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::waveform::{FormatModel, SignalFormat};

pub use rng::{trial_rng, Phase, RNG_ALGORITHM};

/// Everything needed to reproduce a set of Pd curves.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Scene template. Its `snr_db` and `hypothesis` are overridden per run.
    pub scenario: ScenarioConfig,
    /// One format per transmitter.
    pub formats: Vec<SignalFormat>,
    pub detectors: Vec<DetectorKind>,
    pub snr_grid_db: Vec<f64>,
    pub pf_target: f64,
    pub trials_h0: usize,
    pub trials_h1: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.formats.len() != self.scenario.transmitters {
            return Err(Error::InvalidExperiment(format!(
                "{} formats for {} transmitters",
                self.formats.len(),
                self.scenario.transmitters
            )));
        }
        if !(self.pf_target > 0.0 && self.pf_target < 1.0) {
            return Err(Error::InvalidExperiment(format!(
                "false-alarm target {} outside (0, 1)",
                self.pf_target
            )));
        }
        if exceedance_rank(self.pf_target, self.trials_h0) == 0 {
            return Err(Error::InvalidExperiment(format!(
                "{} H0 trials cannot resolve a false-alarm rate of {}",
                self.trials_h0, self.pf_target
            )));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidExperiment(
                "SNR grid must be nonempty and finite".into(),
            ));
        }
        if self.trials_h1 == 0 {
            return Err(Error::InvalidExperiment(
                "need at least one H1 trial".into(),
            ));
        }
        Ok(())
    }

    /// Precomputes `G` and its Gram factor for every transmitter.
    pub fn models(&self) -> Vec<FormatModel> {
        self.formats.iter().cloned().map(FormatModel::new).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdPoint {
    pub snr_db: f64,
    pub pd: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdCurve {
    pub detector: DetectorKind,
    pub threshold: f64,
    pub points: Vec<PdPoint>,
    pub trials_h0: usize,
    pub trials_h1: usize,
    pub seed: u64,
    pub dnr_db: f64,
}

/// Curves for the detectors that ran, plus the error of each that did not.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub curves: Vec<PdCurve>,
    pub failures: Vec<(DetectorKind, Error)>,
}

/// Runs `f` on a pool of `threads` workers (0 = all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidExperiment(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Simulates `trials` scenes and evaluates every detector on each one.
///
/// Returns, per detector, either all statistics in trial order or the error
/// of the earliest failing trial. Call inside [`with_threads`] to bound the
/// parallelism; the output does not depend on it.
pub fn simulate_statistics(
    scenario: &ScenarioConfig,
    models: &[FormatModel],
    detectors: &[DetectorKind],
    seed: u64,
    phase: Phase,
    context: u32,
    trials: usize,
) -> Vec<Result<Vec<f64>>> {
    let sigma2 = scenario.sigma2;
    let per_trial: Vec<Vec<Result<f64>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, phase, context, trial as u64);
            match simulate_observation(scenario, models, &mut rng) {
                Ok(obs) => detectors
                    .iter()
                    .map(|d| {
                        let xi = d.evaluate(models, &obs, sigma2)?;
                        if xi.is_finite() {
                            Ok(xi)
                        } else {
                            Err(Error::InvalidExperiment(format!("{d} returned {xi}")))
                        }
                    })
                    .collect(),
                Err(e) => vec![Err(e); detectors.len()],
            }
        })
        .collect();

    (0..detectors.len())
        .map(|k| per_trial.iter().map(|row| row[k].clone()).collect())
        .collect()
}

/// `floor(pf · n)`, the rank of the threshold among the sorted statistics.
pub fn exceedance_rank(pf: f64, n: usize) -> usize {
    // 0.29 * 100.0 evaluates to 28.999999999999996
    ((pf * n as f64) * (1.0 + 1e-12)).floor() as usize
}

/// The `k`-th largest statistic with `k = floor(pf · n)`.
pub fn threshold_from_statistics(stats: &[f64], pf: f64) -> Result<f64> {
    let k = exceedance_rank(pf, stats.len());
    if k == 0 || k > stats.len() {
        return Err(Error::InvalidExperiment(format!(
            "{} statistics cannot resolve a false-alarm rate of {pf}",
            stats.len()
        )));
    }
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[k - 1])
}

/// Fraction of statistics strictly above `threshold`, with its binomial
/// standard error.
pub fn detection_rate(stats: &[f64], threshold: f64) -> (f64, f64) {
    let n = stats.len() as f64;
    let hits = stats.iter().filter(|&&x| x > threshold).count() as f64;
    let pd = hits / n;
    (pd, (pd * (1.0 - pd) / n).sqrt())
}

fn with_hypothesis(
    config: &ExperimentConfig,
    hypothesis: Hypothesis,
    snr_db: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        hypothesis,
        snr_db,
        ..config.scenario.clone()
    }
}

/// Thresholds for every configured detector from `trials_h0` H0 trials.
pub fn calibrate_thresholds(config: &ExperimentConfig, models: &[FormatModel]) -> Vec<Result<f64>> {
    let scenario = with_hypothesis(config, Hypothesis::H0, config.scenario.snr_db);
    simulate_statistics(
        &scenario,
        models,
        &config.detectors,
        config.seed,
        Phase::Calibration,
        0,
        config.trials_h0,
    )
    .into_iter()
    .map(|stats| threshold_from_statistics(&stats?, config.pf_target))
    .collect()
}

/// Threshold for one detector.
pub fn calibrate_threshold(
    detector: DetectorKind,
    config: &ExperimentConfig,
    models: &[FormatModel],
) -> Result<f64> {
    let single = ExperimentConfig {
        detectors: vec![detector],
        ..config.clone()
    };
    calibrate_thresholds(&single, models).remove(0)
}

/// Empirical false-alarm rate of `threshold` on `trials` fresh H0 trials,
/// drawn from a stream disjoint from calibration.
pub fn verify_false_alarm(
    detector: DetectorKind,
    threshold: f64,
    config: &ExperimentConfig,
    models: &[FormatModel],
    trials: usize,
) -> Result<(f64, f64)> {
    let scenario = with_hypothesis(config, Hypothesis::H0, config.scenario.snr_db);
    let stats = simulate_statistics(
        &scenario,
        models,
        &[detector],
        config.seed,
        Phase::Verification,
        0,
        trials,
    )
    .remove(0)?;
    Ok(detection_rate(&stats, threshold))
}

/// Pd and standard error at one SNR from `trials_h1` H1 trials. `grid_index`
/// selects the random stream so grid points are independent.
pub fn estimate_pd(
    detector: DetectorKind,
    threshold: f64,
    config: &ExperimentConfig,
    models: &[FormatModel],
    snr_db: f64,
    grid_index: u32,
) -> Result<(f64, f64)> {
    let scenario = with_hypothesis(config, Hypothesis::H1, snr_db);
    let stats = simulate_statistics(
        &scenario,
        models,
        &[detector],
        config.seed,
        Phase::Detection,
        grid_index,
        config.trials_h1,
    )
    .remove(0)?;
    Ok(detection_rate(&stats, threshold))
}

/// Calibrates every detector and sweeps the SNR grid, using `threads`
/// workers (0 = all cores). A detector that fails is reported in
/// `failures` and the others continue.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let models = config.models();
    with_threads(threads, || {
        let mut failures = Vec::new();
        let mut active = Vec::new();
        for (d, t) in config
            .detectors
            .iter()
            .zip(calibrate_thresholds(config, &models))
        {
            match t {
                Ok(t) => active.push((*d, t, Vec::new())),
                Err(e) => failures.push((*d, e)),
            }
        }
        let kinds: Vec<DetectorKind> = active.iter().map(|(d, _, _)| *d).collect();
        for (idx, &snr_db) in config.snr_grid_db.iter().enumerate() {
            let scenario = with_hypothesis(config, Hypothesis::H1, snr_db);
            let stats = simulate_statistics(
                &scenario,
                &models,
                &kinds,
                config.seed,
                Phase::Detection,
                idx as u32,
                config.trials_h1,
            );
            for (entry, s) in active.iter_mut().zip(stats) {
                entry.2.push(s.map(|s| {
                    let (pd, stderr) = detection_rate(&s, entry.1);
                    PdPoint { snr_db, pd, stderr }
                }));
            }
        }
        let mut curves = Vec::new();
        for (detector, threshold, points) in active {
            match points.into_iter().collect::<Result<Vec<_>>>() {
                Ok(points) => curves.push(PdCurve {
                    detector,
                    threshold,
                    points,
                    trials_h0: config.trials_h0,
                    trials_h1: config.trials_h1,
                    seed: config.seed,
                    dnr_db: config.scenario.dnr_db,
                }),
                Err(e) => failures.push((detector, e)),
            }
        }
        ExperimentResult { curves, failures }
    })
}
