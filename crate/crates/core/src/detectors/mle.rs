//! Maximum-likelihood estimates for the signal model `s_j = μ_j G b + n_j`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gen_eig_max, inner, largest_eigenvalue, norm_sqr, ComplexMatrix};
use crate::waveform::FormatModel;

/// `μ̂ = (G b)^H s / ||G b||²`, the least-squares gain of `s` on `G b`.
pub fn mle_mu(g: &ComplexMatrix, b: &[Complex64], s: &[Complex64]) -> Result<Complex64> {
    let gb = g.matvec(b)?;
    mle_mu_on(&gb, s)
}

/// [`mle_mu`] with `G b` already formed.
pub fn mle_mu_on(gb: &[Complex64], s: &[Complex64]) -> Result<Complex64> {
    if gb.len() != s.len() {
        return Err(Error::DimensionMismatch(format!(
            "signal of length {} against observation of length {}",
            gb.len(),
            s.len()
        )));
    }
    let energy = norm_sqr(gb);
    if energy.sqrt() <= 1e-300 {
        return Err(Error::ZeroSignal);
    }
    Ok(inner(gb, s) / energy)
}

/// Relaxed symbol estimate `b̂ = v_1(G^H φ φ^H G, G^H G)`, unit `G^H G`-norm.
pub fn mle_b_relaxed(g: &ComplexMatrix, phi: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let x = g.adjoint_matmul(phi)?;
    gen_eig_max(&x.outer(), &g.gram()).map(|r| r.vector)
}

/// `λ_1(G^H φ φ^H G, G^H G)`.
///
/// With `G^H G = L L^H` and `Y = L^-1 G^H φ`, the pencil reduces to
/// `Y Y^H`, whose nonzero spectrum equals that of the small Gram matrix
/// `Y^H Y` (as many rows as `φ` has columns).
pub fn relaxed_lambda(model: &FormatModel, phi: &ComplexMatrix) -> Result<f64> {
    let factor = model.gram_factor()?;
    let x = model.g().adjoint_matmul(phi)?;
    let y = factor.solve_lower_matrix(&x)?;
    largest_eigenvalue(&y.gram())
}

/// `λ_1^*(φ φ^H)` computed on the Gram side as `λ_1^*(φ^H φ)`.
pub fn gram_lambda(phi: &ComplexMatrix) -> Result<f64> {
    largest_eigenvalue(&phi.gram())
}

/// Profile log-likelihood term `(G b)^H φ φ^H (G b) / ||G b||²` for a given
/// symbol vector: the energy of `φ` captured along `G b`.
pub fn profile_energy(g: &ComplexMatrix, phi: &ComplexMatrix, b: &[Complex64]) -> Result<f64> {
    let gb = g.matvec(b)?;
    let energy = norm_sqr(&gb);
    if energy.sqrt() <= 1e-300 {
        return Err(Error::ZeroSignal);
    }
    let proj = ComplexMatrix::column_vector(&gb).adjoint_matmul(phi)?;
    Ok(proj.norm_sqr() / energy)
}

/// `Σ_j ||s_j - μ̂_j G b||²` with every `μ̂_j` from [`mle_mu`]: the
/// least-squares residual of the columns of `φ` on the single direction `G b`.
pub fn fit_residual(g: &ComplexMatrix, phi: &ComplexMatrix, b: &[Complex64]) -> Result<f64> {
    let gb = g.matvec(b)?;
    let mut total = 0.0;
    for j in 0..phi.cols() {
        let s = phi.column(j);
        let mu = mle_mu_on(&gb, &s)?;
        total += s
            .iter()
            .zip(&gb)
            .map(|(x, y)| (x - mu * y).norm_sqr())
            .sum::<f64>();
    }
    Ok(total)
}

/// One transmitter's contribution `E^i - λ_1^i` to the noise-variance MLE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTerm {
    pub energy: f64,
    pub lambda: f64,
}

impl ResidualTerm {
    pub fn value(&self) -> f64 {
        self.energy - self.lambda
    }
}

/// `σ̂² = (1/c_1) Σ_i [E^i - λ_1^i]` with `c_1 = Nt Nr N`.
///
/// A term below `-1e-9 max(1, E^i)` violates the PSD ordering `λ_1 ≤ E` and is
/// reported as [`Error::NegativeResidual`].
pub fn mle_sigma2(terms: &[ResidualTerm], c1: usize) -> Result<f64> {
    if c1 == 0 {
        return Err(Error::DimensionMismatch("c1 must be positive".into()));
    }
    let mut sum = 0.0;
    for t in terms {
        let v = t.value();
        if v < -1e-9 * t.energy.abs().max(1.0) {
            return Err(Error::NegativeResidual(v));
        }
        sum += v;
    }
    Ok(sum / c1 as f64)
}
