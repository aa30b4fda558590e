//! Exact constellation-constrained GLRT by exhaustive symbol search.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix};
use crate::waveform::FormatModel;

/// Default bound on `|A|^ℬ` candidates per transmitter.
pub const DEFAULT_SEARCH_CAP: u64 = 1 << 16;

/// Number of candidate sequences, failing above `cap`.
pub fn search_space(model: &FormatModel, cap: u64) -> Result<u64> {
    let alphabet = model.constellation().len() as u128;
    let size = u32::try_from(model.symbol_count())
        .ok()
        .and_then(|n| alphabet.checked_pow(n))
        .unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::SearchSpaceTooLarge { size, cap });
    }
    Ok(size as u64)
}

/// `max_b ||φ_k^H G b||² / ||G b||²` over `b ∈ A^ℬ`, for each `φ_k` in
/// `phis`, sharing one pass over the candidates.
///
/// Returns the maxima and the number of candidates visited.
pub fn max_profile_energies(
    model: &FormatModel,
    phis: &[&ComplexMatrix],
    cap: u64,
) -> Result<(Vec<f64>, u64)> {
    let count = search_space(model, cap)?;
    let g = model.g();
    let gram = g.gram();
    let projected: Vec<ComplexMatrix> = phis
        .iter()
        .map(|phi| g.adjoint_matmul(phi))
        .collect::<Result<_>>()?;

    let points = model.constellation().points();
    let dim = model.symbol_count();
    let radix = points.len();
    let mut digits = vec![0usize; dim];
    let mut b = vec![points[0]; dim];
    let mut best = vec![f64::NEG_INFINITY; phis.len()];
    let mut gram_b = vec![Complex64::new(0.0, 0.0); dim];

    for _ in 0..count {
        for (i, slot) in gram_b.iter_mut().enumerate() {
            *slot = gram.row(i).iter().zip(&b).map(|(x, y)| x * y).sum();
        }
        let energy = inner(&b, &gram_b).re;
        if energy > 1e-300 {
            for (x, slot) in projected.iter().zip(best.iter_mut()) {
                // ||X^H b||² with X = G^H φ
                let mut captured = 0.0;
                for col in 0..x.cols() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (row, bv) in b.iter().enumerate() {
                        acc += x[(row, col)].conj() * bv;
                    }
                    captured += acc.norm_sqr();
                }
                let value = captured / energy;
                if value > *slot {
                    *slot = value;
                }
            }
        }
        // mixed-radix increment
        for (d, digit) in digits.iter_mut().enumerate() {
            *digit += 1;
            if *digit < radix {
                b[d] = points[*digit];
                break;
            }
            *digit = 0;
            b[d] = points[0];
        }
    }
    if best.iter().any(|v| !v.is_finite()) {
        return Err(Error::ZeroSignal);
    }
    Ok((best, count))
}
