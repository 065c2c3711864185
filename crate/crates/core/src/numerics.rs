//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is a thin layer over `nalgebra`'s decompositions that adds
//! the tolerance conventions of the rest of the crate: ranks and kernels are
//! decided relative to the largest singular value, and square roots of
//! positive semidefinite matrices absorb tiny negative eigenvalues produced by
//! roundoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Thresholds shared by every numerical decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value threshold for ranks and kernels.
    pub rank_rel: f64,
    /// Absolute threshold for identity residuals and Laplacian singularity.
    pub residual_abs: f64,
    /// A pair is pure when its purity index is at most `1 - purity_margin`.
    pub purity_margin: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-10,
            residual_abs: 1e-8,
            purity_margin: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.rank_rel) && ok(self.residual_abs) && ok(self.purity_margin) {
            Ok(())
        } else {
            Err(Error::Parse(format!("tolerances must be finite and nonnegative: {self:?}")))
        }
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn ensure_finite(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Frobenius norm.
pub fn fro(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}×{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// `‖M − M*‖_F`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

fn hermitian_part(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    ensure_square(m, "Hermitian input")?;
    let residual = hermitian_defect(m);
    if residual > tol.residual_abs * (1.0 + fro(m)) {
        return Err(Error::NotHermitian { residual });
    }
    Ok((m + m.adjoint()).scale(0.5))
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
pub fn hermitian_eigen(m: &ComplexMatrix, tol: &Tolerance) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = hermitian_part(m, tol)?;
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

pub fn min_eig_hermitian(m: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    let (values, _) = hermitian_eigen(m, tol)?;
    Ok(values[0])
}

pub fn max_eig_hermitian(m: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    Ok(-min_eig_hermitian(&(-m), tol)?)
}

/// Square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-rank_rel·max(scale, 1), 0)` are clamped to zero, where
/// `scale` is the largest eigenvalue magnitude, and eigenvalues at roundoff
/// level are treated as exact zeros so that singular defects stay singular.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(m, tol)?;
    let n = values.len();
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let limit = tol.rank_rel * scale.max(1.0);
    let noise = 64.0 * n as f64 * f64::EPSILON * scale.max(1.0);
    if values[0] < -limit {
        return Err(Error::NotPsd {
            eigenvalue: values[0],
            limit: -limit,
        });
    }
    let roots: Vec<f64> = values
        .iter()
        .map(|&v| if v <= noise { 0.0 } else { v.sqrt() })
        .collect();
    let mut scaled = vectors.clone();
    for (k, root) in roots.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*root);
    }
    let root = &scaled * vectors.adjoint();
    Ok((&root + root.adjoint()).scale(0.5))
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn rank_threshold(sigma_max: f64, tol: &Tolerance) -> f64 {
    tol.rank_rel * sigma_max
}

pub fn numerical_rank(m: &ComplexMatrix, tol: &Tolerance) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    let threshold = rank_threshold(top, tol);
    sv.iter().filter(|&&s| s > threshold).count()
}

/// Orthonormal basis of the numerical null space, returned as the columns of
/// a `cols × k` matrix (`k = 0` when `m` is injective).
pub fn kernel_basis(m: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    // Pad short matrices so the SVD yields a full right singular basis.
    let square = if m.nrows() < cols {
        let mut padded = ComplexMatrix::zeros(cols, cols);
        padded.rows_mut(0, m.nrows()).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let top = sigma.iter().fold(0.0f64, |a, &s| a.max(s));
    let threshold = rank_threshold(top, tol);
    let picked: Vec<usize> = (0..sigma.len())
        .filter(|&i| top == 0.0 || sigma[i] <= threshold)
        .collect();
    let mut basis = ComplexMatrix::zeros(cols, picked.len());
    for (k, &i) in picked.iter().enumerate() {
        for r in 0..cols {
            basis[(r, k)] = v_t[(i, r)].conj();
        }
    }
    basis
}

/// Orthonormal basis of the numerical column space.
pub fn range_basis(m: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    if m.is_empty() {
        return ComplexMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma = &svd.singular_values;
    let top = sigma.iter().fold(0.0f64, |a, &s| a.max(s));
    if top == 0.0 {
        return ComplexMatrix::zeros(m.nrows(), 0);
    }
    let threshold = rank_threshold(top, tol);
    let picked: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > threshold).collect();
    ComplexMatrix::from_fn(m.nrows(), picked.len(), |r, k| u[(r, picked[k])])
}

/// Solves `M·X = B` for square, numerically invertible `M`.
pub fn solve(m: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let n = ensure_square(m, "system matrix")?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, system has {n}",
            b.nrows()
        )));
    }
    let sv = singular_values(m);
    let top = sv[0];
    let bottom = sv[n - 1];
    let ratio = if top == 0.0 { 0.0 } else { bottom / top };
    if ratio <= tol.rank_rel {
        return Err(Error::Singular { ratio });
    }
    let x = m.clone().lu().solve(b).ok_or(Error::Singular { ratio })?;
    let residual = fro(&(m * &x - b));
    if residual > tol.residual_abs * (1.0 + fro(b)) {
        return Err(Error::Singular { ratio });
    }
    Ok(x)
}

pub fn inverse(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let n = ensure_square(m, "matrix to invert")?;
    solve(m, &ComplexMatrix::identity(n, n), tol)
}

pub fn hstack(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.nrows(), b.nrows(), "hstack row mismatch");
    let mut out = ComplexMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

pub fn vstack(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.ncols(), b.ncols(), "vstack column mismatch");
    let mut out = ComplexMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// `[[a, b], [c, d]]` from four equally shaped blocks.
pub fn block2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> ComplexMatrix {
    vstack(&hstack(a, b), &hstack(c, d))
}

pub fn scaled_identity(n: usize, s: Complex64) -> ComplexMatrix {
    ComplexMatrix::identity(n, n) * s
}

/// A vector as an `n × 1` matrix.
pub fn column(v: &ComplexVector) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn diag(entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(entries))
}
