//! Known-format transmit matrices `G` and synthesized samples `u = G b`.
//!
//! Time is measured in symbol periods (`T_sym = 1`); only ratios of durations
//! enter the sampled pulse and the OFDM subcarrier matrix.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, CholeskyFactor, ComplexMatrix};

/// Finite symbol alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn bpsk() -> Self {
        Self {
            name: "bpsk".into(),
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        }
    }

    /// Unit-energy QPSK.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            name: "qpsk".into(),
            points: vec![
                Complex64::new(a, a),
                Complex64::new(-a, a),
                Complex64::new(-a, -a),
                Complex64::new(a, -a),
            ],
        }
    }

    pub fn custom(name: impl Into<String>, points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidFormat("empty constellation".into()));
        }
        Ok(Self {
            name: name.into(),
            points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::bpsk()),
            "qpsk" => Ok(Self::qpsk()),
            other => Err(Error::InvalidFormat(format!(
                "unknown constellation `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Raised-cosine impulse response at `t` (in symbol periods).
pub fn raised_cosine(t: f64, rolloff: f64) -> f64 {
    if rolloff == 0.0 {
        return sinc(t);
    }
    let x = 2.0 * rolloff * t;
    let denom = 1.0 - x * x;
    if denom.abs() < 1e-10 {
        // removable singularity at |t| = 1 / (2 rolloff)
        return PI / 4.0 * sinc(1.0 / (2.0 * rolloff));
    }
    sinc(t) * (PI * rolloff * t).cos() / denom
}

/// `span * sps` samples of the raised-cosine pulse, centred on the span:
/// sample `k` sits at `t = (k - span*sps/2) / sps`.
pub fn raised_cosine_pulse(rolloff: f64, span: usize, sps: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::InvalidRolloff(rolloff));
    }
    if span == 0 || sps == 0 {
        return Err(Error::InvalidFormat(
            "pulse span and samples per symbol must be >= 1".into(),
        ));
    }
    let total = span * sps;
    Ok((0..total)
        .map(|k| {
            let t = (k as f64 - (total / 2) as f64) / sps as f64;
            raised_cosine(t, rolloff)
        })
        .collect())
}

/// Linear digital modulation: `u(pT_s + nT) = Σ_k g(pT_s + kT) b_{n-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModFormat {
    pulse: Vec<Complex64>,
    span: usize,
    sps: usize,
    symbols: usize,
    constellation: Constellation,
}

impl LinearModFormat {
    /// Format with user-supplied pulse samples `g(k T_s)`, `k < span * sps`.
    pub fn new(
        pulse: Vec<Complex64>,
        span: usize,
        sps: usize,
        symbols: usize,
        constellation: Constellation,
    ) -> Result<Self> {
        if span == 0 || sps == 0 || symbols == 0 {
            return Err(Error::InvalidFormat(
                "span, samples per symbol and symbol count must be >= 1".into(),
            ));
        }
        if pulse.len() != span * sps {
            return Err(Error::InvalidFormat(format!(
                "pulse has {} samples, expected span*sps = {}",
                pulse.len(),
                span * sps
            )));
        }
        Ok(Self {
            pulse,
            span,
            sps,
            symbols,
            constellation,
        })
    }

    pub fn raised_cosine(
        rolloff: f64,
        span: usize,
        sps: usize,
        symbols: usize,
        constellation: Constellation,
    ) -> Result<Self> {
        let pulse = raised_cosine_pulse(rolloff, span, sps)?
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        Self::new(pulse, span, sps, symbols, constellation)
    }

    pub fn pulse(&self) -> &[Complex64] {
        &self.pulse
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.sps
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    /// Pulse segment `g_k` covering `[kT, (k+1)T)`.
    pub fn segment(&self, k: usize) -> &[Complex64] {
        &self.pulse[k * self.sps..(k + 1) * self.sps]
    }

    /// Banded block-Toeplitz `LP x (L + M - 1)` matrix; block-row `r` holds
    /// `g_0 .. g_{M-1}` starting at block-column `r`.
    pub fn build_g(&self) -> ComplexMatrix {
        let rows = self.symbols * self.sps;
        let cols = self.symbols + self.span - 1;
        let mut g = ComplexMatrix::zeros(rows, cols);
        for r in 0..self.symbols {
            for k in 0..self.span {
                for (p, &x) in self.segment(k).iter().enumerate() {
                    g[(r * self.sps + p, r + k)] = x;
                }
            }
        }
        g
    }
}

/// OFDM with `Ns` subcarriers, `P` samples per complex symbol and `L` OFDM
/// symbols per observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmFormat {
    subcarriers: usize,
    sps: usize,
    guard: f64,
    useful: f64,
    symbols: usize,
    constellation: Constellation,
}

impl OfdmFormat {
    /// `guard` and `useful` are `T_g` and `T_u` in any common time unit.
    pub fn new(
        subcarriers: usize,
        sps: usize,
        guard: f64,
        useful: f64,
        symbols: usize,
        constellation: Constellation,
    ) -> Result<Self> {
        if subcarriers == 0 || sps == 0 || symbols == 0 {
            return Err(Error::InvalidFormat(
                "subcarriers, samples per symbol and symbol count must be >= 1".into(),
            ));
        }
        if !(guard.is_finite() && guard >= 0.0 && useful.is_finite() && useful > 0.0) {
            return Err(Error::InvalidFormat(format!(
                "need guard >= 0 and useful > 0, got {guard} and {useful}"
            )));
        }
        Ok(Self {
            subcarriers,
            sps,
            guard,
            useful,
            symbols,
            constellation,
        })
    }

    /// Format with `T_sym = 1` split into guard fraction and useful part.
    pub fn with_guard_fraction(
        subcarriers: usize,
        sps: usize,
        guard_fraction: f64,
        symbols: usize,
        constellation: Constellation,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&guard_fraction) {
            return Err(Error::InvalidFormat(format!(
                "guard fraction {guard_fraction} outside [0, 1)"
            )));
        }
        Self::new(
            subcarriers,
            sps,
            guard_fraction,
            1.0 - guard_fraction,
            symbols,
            constellation,
        )
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.sps
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    pub fn useful(&self) -> f64 {
        self.useful
    }

    /// `T_s = (T_u + T_g) / (Ns P)`
    pub fn sampling_interval(&self) -> f64 {
        (self.useful + self.guard) / (self.subcarriers * self.sps) as f64
    }

    /// Per-symbol `Ns P x Ns` matrix, `h_ml = exp(j 2π l (m T_s - T_g) / T_u)`.
    pub fn subcarrier_matrix(&self) -> ComplexMatrix {
        let ts = self.sampling_interval();
        ComplexMatrix::from_fn(self.subcarriers * self.sps, self.subcarriers, |m, l| {
            let phase = 2.0 * PI * l as f64 * (m as f64 * ts - self.guard) / self.useful;
            Complex64::from_polar(1.0, phase)
        })
    }

    /// `G = I_L ⊗ H`
    pub fn build_g(&self) -> ComplexMatrix {
        self.subcarrier_matrix().kron_identity(self.symbols)
    }
}

/// Either supported modulation family.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalFormat {
    Linear(LinearModFormat),
    Ofdm(OfdmFormat),
}

impl SignalFormat {
    pub fn build_g(&self) -> ComplexMatrix {
        match self {
            Self::Linear(f) => f.build_g(),
            Self::Ofdm(f) => f.build_g(),
        }
    }

    /// Number of unknown symbols per window (columns of `G`).
    pub fn symbol_count(&self) -> usize {
        match self {
            Self::Linear(f) => f.symbols + f.span - 1,
            Self::Ofdm(f) => f.symbols * f.subcarriers,
        }
    }

    /// Samples per window `N` (rows of `G`).
    pub fn sample_count(&self) -> usize {
        match self {
            Self::Linear(f) => f.symbols * f.sps,
            Self::Ofdm(f) => f.symbols * f.subcarriers * f.sps,
        }
    }

    pub fn constellation(&self) -> &Constellation {
        match self {
            Self::Linear(f) => &f.constellation,
            Self::Ofdm(f) => &f.constellation,
        }
    }
}

/// A format together with its `G` matrix and the Cholesky factor of
/// `G^H G`, prepared once and shared by simulation and detection.
#[derive(Debug, Clone)]
pub struct FormatModel {
    format: SignalFormat,
    g: ComplexMatrix,
    gram: Result<CholeskyFactor>,
}

impl FormatModel {
    pub fn new(format: SignalFormat) -> Self {
        let g = format.build_g();
        let gram = CholeskyFactor::new(&g.gram());
        Self { format, g, gram }
    }

    pub fn format(&self) -> &SignalFormat {
        &self.format
    }

    pub fn g(&self) -> &ComplexMatrix {
        &self.g
    }

    /// Cholesky factor of `G^H G`; fails when `G` is column-rank deficient.
    pub fn gram_factor(&self) -> Result<&CholeskyFactor> {
        self.gram.as_ref().map_err(Clone::clone)
    }

    pub fn sample_count(&self) -> usize {
        self.g.rows()
    }

    pub fn symbol_count(&self) -> usize {
        self.g.cols()
    }

    pub fn constellation(&self) -> &Constellation {
        self.format.constellation()
    }
}

/// I.i.d. uniform draws from the constellation.
pub fn draw_symbols<R: Rng + ?Sized>(
    constellation: &Constellation,
    count: usize,
    rng: &mut R,
) -> Vec<Complex64> {
    let pts = constellation.points();
    (0..count)
        .map(|_| pts[rng.random_range(0..pts.len())])
        .collect()
}

/// One realization of the transmitted window.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitRealization {
    pub b: Vec<Complex64>,
    pub u: Vec<Complex64>,
}

impl TransmitRealization {
    pub fn sample_count(&self) -> usize {
        self.u.len()
    }
}

/// `u = sqrt(N) G b / ||G b||` so that `||u||² = N`.
pub fn synthesize_u(g: &ComplexMatrix, b: &[Complex64]) -> Result<TransmitRealization> {
    let gb = g.matvec(b)?;
    let energy = norm_sqr(&gb);
    if energy.sqrt() <= 1e-300 {
        return Err(Error::ZeroSignal);
    }
    let scale = (g.rows() as f64 / energy).sqrt();
    Ok(TransmitRealization {
        b: b.to_vec(),
        u: gb.into_iter().map(|x| x * scale).collect(),
    })
}
