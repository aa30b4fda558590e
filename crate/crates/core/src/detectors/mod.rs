//! GLRT test statistics for passive MIMO radar.
//!
//! | kind | statistic |
//! |------|-----------|
//! | `AMR_GLRT` | `(1/σ²) Σ_i Σ_j |u_i^H s_s^{ij}|²` |
//! | `PMR_GLRT` | `(1/σ²) Σ_i [λ*(φ_1 φ_1^H) - λ*(φ_r φ_r^H)]` |
//! | `PSL_GLRT` | `(1/σ²) Σ_i λ*(φ_s φ_s^H)` |
//! | `PMR_RGLRT_K` | `(1/σ²) Σ_i [λ(G^H φ_1 φ_1^H G, G^H G) - λ(G^H φ_r φ_r^H G, G^H G)]` |
//! | `PSL_RGLRT_K` | `(1/σ²) Σ_i λ(G^H φ_s φ_s^H G, G^H G)` |
//! | `PMR_RGLRT_UK` | `Σ_i [E_i - λ(G^H φ_r φ_r^H G, G^H G)] / Σ_i [E_i - λ(G^H φ_1 φ_1^H G, G^H G)]` |
//! | `PMR_GLRT_K_EXACT` | as `PMR_RGLRT_K`, with the relaxed maxima replaced by a search over `b ∈ A^ℬ` |
//!
//! `λ*` is the largest eigenvalue and `λ(A, B)` the largest generalized
//! eigenvalue. Every `N x N` outer product is evaluated through its small
//! Gram-side counterpart, which has the same nonzero spectrum.

mod exact;
mod mle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{Observations, TransmitterObservation};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::waveform::FormatModel;

pub use exact::{max_profile_energies, search_space, DEFAULT_SEARCH_CAP};
pub use mle::{
    fit_residual, gram_lambda, mle_b_relaxed, mle_mu, mle_mu_on, mle_sigma2, profile_energy,
    relaxed_lambda, ResidualTerm,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    AmrGlrt,
    PmrGlrt,
    PslGlrt,
    PmrRglrtK,
    PslRglrtK,
    PmrRglrtUk,
    PmrGlrtKExact,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 7] = [
        Self::AmrGlrt,
        Self::PmrGlrt,
        Self::PslGlrt,
        Self::PmrRglrtK,
        Self::PslRglrtK,
        Self::PmrRglrtUk,
        Self::PmrGlrtKExact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::AmrGlrt => "AMR_GLRT",
            Self::PmrGlrt => "PMR_GLRT",
            Self::PslGlrt => "PSL_GLRT",
            Self::PmrRglrtK => "PMR_RGLRT_K",
            Self::PslRglrtK => "PSL_RGLRT_K",
            Self::PmrRglrtUk => "PMR_RGLRT_UK",
            Self::PmrGlrtKExact => "PMR_GLRT_K_EXACT",
        }
    }

    /// True for statistics that use the reference channels.
    pub fn needs_reference(self) -> bool {
        matches!(
            self,
            Self::PmrGlrt | Self::PmrRglrtK | Self::PmrRglrtUk | Self::PmrGlrtKExact
        )
    }

    /// Evaluates the statistic on one set of observations.
    pub fn evaluate(self, models: &[FormatModel], obs: &Observations, sigma2: f64) -> Result<f64> {
        match self {
            Self::AmrGlrt => amr_glrt(obs, sigma2),
            Self::PmrGlrt => pmr_glrt(obs, sigma2),
            Self::PslGlrt => psl_glrt(obs, sigma2),
            Self::PmrRglrtK => pmr_rglrt_k(models, obs, sigma2),
            Self::PslRglrtK => psl_rglrt_k(models, obs, sigma2),
            Self::PmrRglrtUk => pmr_rglrt_uk(models, obs),
            Self::PmrGlrtKExact => pmr_glrt_k_exact(models, obs, sigma2, DEFAULT_SEARCH_CAP),
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| format!("unknown detector `{s}`"))
    }
}

impl Serialize for DetectorKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for DetectorKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_models(models: &[FormatModel], obs: &Observations) -> Result<()> {
    if models.len() != obs.transmitters.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} formats for {} transmitters",
            models.len(),
            obs.transmitters.len()
        )));
    }
    for (m, t) in models.iter().zip(&obs.transmitters) {
        if m.sample_count() != t.sample_count() {
            return Err(Error::DimensionMismatch(format!(
                "format has {} samples, observation has {}",
                m.sample_count(),
                t.sample_count()
            )));
        }
    }
    Ok(())
}

fn reference<'a>(t: &'a TransmitterObservation, who: &'static str) -> Result<&'a ComplexMatrix> {
    t.phi_r.as_ref().ok_or(Error::MissingReference(who))
}

fn phi1(t: &TransmitterObservation, who: &'static str) -> Result<ComplexMatrix> {
    t.phi_s.hcat(reference(t, who)?)
}

/// Active-radar GLRT with the transmitted signal known.
pub fn amr_glrt(obs: &Observations, sigma2: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in &obs.transmitters {
        let u = t.u.as_ref().ok_or(Error::MissingKnownSignal("AMR_GLRT"))?;
        if u.len() != t.sample_count() {
            return Err(Error::DimensionMismatch("known signal length".into()));
        }
        let proj = ComplexMatrix::column_vector(u).adjoint_matmul(&t.phi_s)?;
        total += proj.norm_sqr();
    }
    Ok(total / sigma2)
}

/// Passive MIMO radar GLRT ignoring the signal format.
pub fn pmr_glrt(obs: &Observations, sigma2: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in &obs.transmitters {
        total += gram_lambda(&phi1(t, "PMR_GLRT")?)? - gram_lambda(reference(t, "PMR_GLRT")?)?;
    }
    Ok(total / sigma2)
}

/// Passive source localization GLRT ignoring the signal format.
pub fn psl_glrt(obs: &Observations, sigma2: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in &obs.transmitters {
        total += gram_lambda(&t.phi_s)?;
    }
    Ok(total / sigma2)
}

/// Relaxed GLRT with known signal format and known noise variance.
pub fn pmr_rglrt_k(models: &[FormatModel], obs: &Observations, sigma2: f64) -> Result<f64> {
    check_models(models, obs)?;
    let mut total = 0.0;
    for (m, t) in models.iter().zip(&obs.transmitters) {
        total += relaxed_lambda(m, &phi1(t, "PMR_RGLRT_K")?)?
            - relaxed_lambda(m, reference(t, "PMR_RGLRT_K")?)?;
    }
    Ok(total / sigma2)
}

/// Relaxed source-localization GLRT with known signal format.
pub fn psl_rglrt_k(models: &[FormatModel], obs: &Observations, sigma2: f64) -> Result<f64> {
    check_models(models, obs)?;
    let mut total = 0.0;
    for (m, t) in models.iter().zip(&obs.transmitters) {
        total += relaxed_lambda(m, &t.phi_s)?;
    }
    Ok(total / sigma2)
}

/// Per-transmitter residual terms `E^i - λ_1^i` under both hypotheses,
/// as `(H0, H1)`.
pub fn unknown_variance_terms(
    models: &[FormatModel],
    obs: &Observations,
) -> Result<Vec<(ResidualTerm, ResidualTerm)>> {
    check_models(models, obs)?;
    models
        .iter()
        .zip(&obs.transmitters)
        .map(|(m, t)| {
            let energy = t.esr();
            let h0 = ResidualTerm {
                energy,
                lambda: relaxed_lambda(m, reference(t, "PMR_RGLRT_UK")?)?,
            };
            let h1 = ResidualTerm {
                energy,
                lambda: relaxed_lambda(m, &phi1(t, "PMR_RGLRT_UK")?)?,
            };
            Ok((h0, h1))
        })
        .collect()
}

/// Relaxed GLRT with known signal format and unknown noise variance. Equals
/// `σ̂²_0 / σ̂²_1`, so it does not depend on `σ²`.
pub fn pmr_rglrt_uk(models: &[FormatModel], obs: &Observations) -> Result<f64> {
    let terms = unknown_variance_terms(models, obs)?;
    let energy: f64 = terms.iter().map(|(h0, _)| h0.energy).sum();
    let numerator: f64 = terms.iter().map(|(h0, _)| h0.value()).sum();
    let denominator: f64 = terms.iter().map(|(_, h1)| h1.value()).sum();
    if denominator <= 1e-12 * energy {
        return Err(Error::DegenerateDenominator {
            denominator,
            energy,
        });
    }
    Ok(numerator / denominator)
}

/// Exact (unrelaxed) GLRT with known signal format, maximizing over every
/// symbol sequence of the constellation. Each transmitter is searched
/// independently since the likelihood factors across transmitters.
pub fn pmr_glrt_k_exact(
    models: &[FormatModel],
    obs: &Observations,
    sigma2: f64,
    cap: u64,
) -> Result<f64> {
    check_models(models, obs)?;
    let mut total = 0.0;
    for (m, t) in models.iter().zip(&obs.transmitters) {
        let p1 = phi1(t, "PMR_GLRT_K_EXACT")?;
        let pr = reference(t, "PMR_GLRT_K_EXACT")?;
        let (best, _) = max_profile_energies(m, &[&p1, pr], cap)?;
        total += best[0] - best[1];
    }
    Ok(total / sigma2)
}
