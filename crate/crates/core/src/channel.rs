//! Multistatic scene simulation.
//!
//! For transmitter `i` and receiver `j` the surveillance and reference
//! channels are
//!
//! ```text
//! s_s^{ij} = μ_s^{ij} u^i + n_s^{ij}    (target present, H1)
//! s_s^{ij} =                n_s^{ij}    (target absent,  H0)
//! s_r^{ij} = μ_r^{ij} u^i + n_r^{ij}    (both hypotheses)
//! ```
//!
//! with white circular Gaussian noise of variance `σ²`. The coefficient
//! vectors are drawn from `CN(0, I)` and rescaled on every draw so that
//! `||μ||² / (Nr σ²)` equals the linear SNR (or DNR) target exactly.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, ComplexMatrix};
use crate::waveform::{draw_symbols, synthesize_u, FormatModel};

const MAX_DRAW_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Scene parameters shared by every transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub transmitters: usize,
    pub receivers: usize,
    pub sigma2: f64,
    pub snr_db: f64,
    pub dnr_db: f64,
    pub hypothesis: Hypothesis,
    /// Simulate reference channels (PMR). When false only the surveillance
    /// channels exist (PSL).
    pub include_reference: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            transmitters: 2,
            receivers: 3,
            sigma2: 1.0,
            snr_db: -10.0,
            dnr_db: -10.0,
            hypothesis: Hypothesis::H1,
            include_reference: true,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.transmitters == 0 || self.receivers == 0 {
            return Err(Error::InvalidScenario(
                "need at least one transmitter and one receiver".into(),
            ));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "noise variance must be positive, got {}",
                self.sigma2
            )));
        }
        if !self.snr_db.is_finite() || !self.dnr_db.is_finite() {
            return Err(Error::InvalidScenario("SNR and DNR must be finite".into()));
        }
        Ok(())
    }
}

/// Observations associated with one transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterObservation {
    /// `N x Nr`, column `j` is `s_s^{ij}`.
    pub phi_s: ComplexMatrix,
    /// `N x Nr`, column `j` is `s_r^{ij}`; absent for PSL scenes.
    pub phi_r: Option<ComplexMatrix>,
    /// Transmitted samples, when known (simulation truth or an active radar).
    pub u: Option<Vec<Complex64>>,
}

impl TransmitterObservation {
    /// `φ_1 = [φ_s, φ_r]`
    pub fn phi1(&self) -> Option<ComplexMatrix> {
        self.phi_r
            .as_ref()
            .map(|r| self.phi_s.hcat(r).expect("channels share sample count"))
    }

    /// `E_sr = ||φ_s||² + ||φ_r||²`
    pub fn esr(&self) -> f64 {
        self.phi_s.norm_sqr() + self.phi_r.as_ref().map_or(0.0, ComplexMatrix::norm_sqr)
    }

    pub fn sample_count(&self) -> usize {
        self.phi_s.rows()
    }

    pub fn receivers(&self) -> usize {
        self.phi_s.cols()
    }

    /// Every channel multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            phi_s: self.phi_s.scale(c),
            phi_r: self.phi_r.as_ref().map(|r| r.scale(c)),
            u: self.u.clone(),
        }
    }
}

/// Per-transmitter observation set for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub transmitters: Vec<TransmitterObservation>,
}

impl Observations {
    pub fn has_reference(&self) -> bool {
        self.transmitters.iter().all(|t| t.phi_r.is_some())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            transmitters: self.transmitters.iter().map(|t| t.scaled(c)).collect(),
        }
    }
}

/// `CN(0, I)` draw rescaled so that `||μ||² = Nr σ² 10^(target/10)`.
pub fn draw_scaled_coeffs<R: Rng + ?Sized>(
    receivers: usize,
    target_db: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let target = receivers as f64 * sigma2 * 10f64.powf(target_db / 10.0);
    for _ in 0..MAX_DRAW_ATTEMPTS {
        let raw: Vec<Complex64> = (0..receivers).map(|_| complex_normal(rng, 1.0)).collect();
        let energy = norm_sqr(&raw);
        if energy.sqrt() > 1e-300 {
            let scale = (target / energy).sqrt();
            return Ok(raw.into_iter().map(|x| x * scale).collect());
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_DRAW_ATTEMPTS,
    })
}

/// Circular Gaussian sample with `E|z|² = variance`.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// `N x Nr` matrix of i.i.d. `CN(0, σ²)` entries.
pub fn draw_noise<R: Rng + ?Sized>(
    samples: usize,
    receivers: usize,
    sigma2: f64,
    rng: &mut R,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(samples, receivers, |_, _| complex_normal(rng, sigma2))
}

/// Channel gains substituted for the random draws, with noise suppressed.
/// Used only by algebraic tests.
#[doc(hidden)]
#[derive(Debug, Clone)]
pub struct NoiselessInjection {
    pub mu_s: Vec<Complex64>,
    pub mu_r: Vec<Complex64>,
}

/// Simulates one trial: per transmitter draw `b`, synthesize `u` with
/// `||u||² = N`, draw the channel gains and add noise.
pub fn simulate_observation<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    models: &[FormatModel],
    rng: &mut R,
) -> Result<Observations> {
    simulate(scenario, models, rng, None)
}

#[doc(hidden)]
pub fn simulate_noiseless<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    models: &[FormatModel],
    injection: &NoiselessInjection,
    rng: &mut R,
) -> Result<Observations> {
    simulate(scenario, models, rng, Some(injection))
}

fn simulate<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    models: &[FormatModel],
    rng: &mut R,
    injection: Option<&NoiselessInjection>,
) -> Result<Observations> {
    scenario.validate()?;
    if models.len() != scenario.transmitters {
        return Err(Error::InvalidScenario(format!(
            "{} formats for {} transmitters",
            models.len(),
            scenario.transmitters
        )));
    }
    let nr = scenario.receivers;
    let sigma2 = scenario.sigma2;
    let mut transmitters = Vec::with_capacity(models.len());
    for model in models {
        let b = draw_symbols(model.constellation(), model.symbol_count(), rng);
        let u = synthesize_u(model.g(), &b)?.u;
        let n = u.len();

        let (mu_r, mu_s) = match injection {
            Some(inj) => (inj.mu_r.clone(), inj.mu_s.clone()),
            None => {
                let mu_r = if scenario.include_reference {
                    draw_scaled_coeffs(nr, scenario.dnr_db, sigma2, rng)?
                } else {
                    Vec::new()
                };
                let mu_s = match scenario.hypothesis {
                    Hypothesis::H1 => draw_scaled_coeffs(nr, scenario.snr_db, sigma2, rng)?,
                    Hypothesis::H0 => Vec::new(),
                };
                (mu_r, mu_s)
            }
        };

        let mut channel = |gains: &[Complex64], active: bool| -> Result<ComplexMatrix> {
            let mut phi = match injection {
                Some(_) => ComplexMatrix::zeros(n, nr),
                None => draw_noise(n, nr, sigma2, rng),
            };
            if active {
                if gains.len() != nr {
                    return Err(Error::InvalidScenario(
                        "channel gain count != receivers".into(),
                    ));
                }
                for (j, &mu) in gains.iter().enumerate() {
                    for (k, &x) in u.iter().enumerate() {
                        phi[(k, j)] += mu * x;
                    }
                }
            }
            Ok(phi)
        };

        let phi_s = channel(&mu_s, scenario.hypothesis == Hypothesis::H1)?;
        let phi_r = if scenario.include_reference {
            Some(channel(&mu_r, true)?)
        } else {
            None
        };
        transmitters.push(TransmitterObservation {
            phi_s,
            phi_r,
            u: Some(u),
        });
    }
    Ok(Observations { transmitters })
}
