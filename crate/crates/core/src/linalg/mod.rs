//! Dense complex Hermitian linear algebra.
//!
//! The generalized problem `A w = λ B w` with `A` Hermitian positive
//! semidefinite and `B` Hermitian positive definite is reduced to a standard
//! Hermitian problem through the Cholesky factor of `B`:
//!
//! ```text
//! B = L L^H,   C = L^-1 A L^-H,   C y = λ y,   w = L^-H y
//! ```
//!
//! The standard problem is solved with cyclic complex Jacobi rotations. Only
//! the largest eigenpair is exposed; the matrices in this crate are small
//! (tens of rows), so simplicity wins over asymptotic cost.

mod matrix;

pub use matrix::{inner, norm_sqr, ComplexMatrix};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative off-diagonal tolerance at which Jacobi sweeps stop.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Largest (generalized) eigenpair.
///
/// `vector` has unit `B`-norm (`w^H B w = 1`, with `B = I` for the standard
/// problem) and its largest-magnitude entry is real and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct GenEigResult {
    pub lambda: f64,
    pub vector: Vec<Complex64>,
}

/// Lower-triangular Cholesky factor `L` of a Hermitian positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    l: ComplexMatrix,
}

impl CholeskyFactor {
    pub fn new(b: &ComplexMatrix) -> Result<Self> {
        cholesky(b).map(|l| Self { l })
    }

    pub fn lower(&self) -> &ComplexMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L x = rhs`.
    pub fn solve_lower(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i].re;
        }
        x
    }

    /// Solves `L^H x = rhs`.
    pub fn solve_upper_adjoint(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                // (L^H)[i][j] = conj(L[j][i])
                acc -= self.l[(j, i)].conj() * xj;
            }
            x[i] = acc / self.l[(i, i)].re;
        }
        x
    }

    /// `L^-1 M` for a matrix right-hand side.
    pub fn solve_lower_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim();
        if m.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "factor of order {n} against {} rows",
                m.rows()
            )));
        }
        let k = m.cols();
        let mut out = m.clone();
        for i in 0..n {
            let lrow = self.l.row(i).to_vec();
            for j in 0..i {
                let lij = lrow[j];
                if lij == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..k {
                    let v = out[(j, c)];
                    out[(i, c)] -= lij * v;
                }
            }
            let d = lrow[i].re;
            for c in 0..k {
                out[(i, c)] /= d;
            }
        }
        Ok(out)
    }
}

/// Cholesky factorization `B = L L^H`.
///
/// Fails with [`Error::NotPositiveDefinite`] when any pivot is at or below
/// `1e-12 * trace(B) / n`.
pub fn cholesky(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !b.is_square() {
        return Err(Error::DimensionMismatch(
            "cholesky of a non-square matrix".into(),
        ));
    }
    if !b.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let n = b.rows();
    let tolerance = if n == 0 {
        0.0
    } else {
        1e-12 * b.trace().re / n as f64
    };
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = b[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if pivot.is_nan() || pivot <= tolerance || pivot <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot,
                tolerance,
            });
        }
        let d = pivot.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut acc = b[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / d;
        }
    }
    Ok(l)
}

/// All eigenvalues and eigenvectors (columns of the returned matrix) of a
/// Hermitian matrix by cyclic Jacobi rotations. Eigenvalues are unsorted.
fn jacobi_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.rows();
    let mut a = a.clone();
    a.symmetrize();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.norm();
    let max_sweeps = 100 * n.max(1);
    let zero = Complex64::new(0.0, 0.0);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while scale > 0.0 && off_norm(&a) > JACOBI_TOLERANCE * scale {
        if sweeps == max_sweeps {
            return Err(Error::ConvergenceFailure { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = zero;
                a[(q, p)] = zero;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }
    Ok(((0..n).map(|i| a[(i, i)].re).collect(), v))
}

/// Rotates `v` so its largest-magnitude entry is real and nonnegative.
fn fix_phase(v: &mut [Complex64]) {
    let Some(pivot) = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
    else {
        return;
    };
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let rot = pivot.conj() / mag;
    for x in v.iter_mut() {
        *x *= rot;
    }
}

/// Largest eigenvalue of a Hermitian matrix and a unit eigenvector.
pub fn hermitian_eig_max(a: &ComplexMatrix) -> Result<GenEigResult> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(
            "eigenproblem on a non-square matrix".into(),
        ));
    }
    if !a.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    let (values, vectors) = jacobi_eigen(a)?;
    let (top, lambda) = values
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("n > 0");
    let mut vector = vectors.column(top);
    let nrm = norm_sqr(&vector).sqrt();
    for x in vector.iter_mut() {
        *x /= nrm;
    }
    fix_phase(&mut vector);
    Ok(GenEigResult { lambda, vector })
}

/// Largest eigenvalue only.
pub fn largest_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    hermitian_eig_max(a).map(|r| r.lambda)
}

/// Largest generalized eigenpair of the pencil `(A, B)`.
pub fn gen_eig_max(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<GenEigResult> {
    if !a.is_square() || a.rows() != b.rows() || b.rows() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "pencil of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if !a.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let factor = CholeskyFactor::new(b)?;
    gen_eig_max_factored(a, &factor)
}

/// [`gen_eig_max`] with `B` supplied through its Cholesky factor.
pub fn gen_eig_max_factored(a: &ComplexMatrix, factor: &CholeskyFactor) -> Result<GenEigResult> {
    let x = factor.solve_lower_matrix(a)?;
    let mut c = factor.solve_lower_matrix(&x.adjoint())?;
    c.symmetrize();
    let std = hermitian_eig_max(&c)?;
    let mut vector = factor.solve_upper_adjoint(&std.vector);
    fix_phase(&mut vector);
    Ok(GenEigResult {
        lambda: std.lambda,
        vector,
    })
}

/// Generalized Rayleigh quotient `(w^H A w) / (w^H B w)`.
pub fn rayleigh_quotient(a: &ComplexMatrix, b: &ComplexMatrix, w: &[Complex64]) -> Result<f64> {
    if norm_sqr(w).sqrt() <= 1e-300 {
        return Err(Error::ZeroVector);
    }
    let num = inner(w, &a.matvec(w)?);
    let den = inner(w, &b.matvec(w)?);
    let tol = 1e-10 * den.norm().max(f64::MIN_POSITIVE);
    if num.im.abs() > tol.max(1e-10 * num.norm()) || den.im.abs() > tol {
        return Err(Error::NotHermitian);
    }
    Ok(num.re / den.re)
}
