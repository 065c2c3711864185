//! The characteristic function
//! `θ_A(z) = −A + D_{A*} (I − z1A1* − z2A2*)^{-1} [z1·I  z2·I] D_A`
//! and the spectrum criteria expressed through its kernels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::koszul::koszul_maps;
use crate::numerics::{
    column, hstack, kernel_basis, numerical_rank, range_basis, solve, vstack, ComplexMatrix,
    ComplexVector, Tolerance,
};
use crate::tuple::{BallPoint, CommutingPair};

#[derive(Debug, Clone)]
pub struct CharFnValue {
    pub z: BallPoint,
    /// `θ_A(z)` as an `n × 2n` matrix.
    pub theta: ComplexMatrix,
}

fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `I − z1·A1* − z2·A2*`.
pub fn resolvent_argument(pair: &CommutingPair, z: &BallPoint) -> ComplexMatrix {
    identity(pair.n()) - pair.a1().adjoint() * z.z1 - pair.a2().adjoint() * z.z2
}

/// `I − z̄1·A1 − z̄2·A2`, the adjoint of [`resolvent_argument`].
pub fn adjoint_resolvent_argument(pair: &CommutingPair, z: &BallPoint) -> ComplexMatrix {
    identity(pair.n()) - pair.a1() * z.z1.conj() - pair.a2() * z.z2.conj()
}

fn resolve(m: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    solve(m, b, tol).map_err(|e| match e {
        Error::Singular { .. } => Error::ResolventSingular,
        other => other,
    })
}

/// `[z1·I  z2·I]`, the row operator of a scalar point.
pub fn point_row(n: usize, z: &BallPoint) -> ComplexMatrix {
    hstack(&(identity(n) * z.z1), &(identity(n) * z.z2))
}

/// Evaluates θ with explicit defect operators: shared with the transformed
/// pairs of the `moebius` module.
pub fn theta_matrix(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    defect_star: &ComplexMatrix,
    defect: &ComplexMatrix,
    z: &BallPoint,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let n = a1.nrows();
    let arg = identity(n) - a1.adjoint() * z.z1 - a2.adjoint() * z.z2;
    let middle = resolve(&arg, &point_row(n, z), tol)?;
    Ok(-hstack(a1, a2) + defect_star * middle * defect)
}

pub fn theta(pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<CharFnValue> {
    let theta = theta_matrix(pair.a1(), pair.a2(), pair.defect_star(), pair.defect(), z, tol)?;
    Ok(CharFnValue { z: *z, theta })
}

fn split(v: &ComplexVector, n: usize) -> (ComplexVector, ComplexVector) {
    (v.rows(0, n).into_owned(), v.rows(n, n).into_owned())
}

fn join(x: &ComplexVector, y: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(x.len() + y.len());
    out.rows_mut(0, x.len()).copy_from(x);
    out.rows_mut(x.len(), y.len()).copy_from(y);
    out
}

/// `‖θ_A(z)·D_A·(x;y) − D_{A*}·(I − z1A1* − z2A2*)^{-1}·[(z1x + z2y) − (A1x + A2y)]‖`.
pub fn theta_defect_residual(
    pair: &CommutingPair,
    z: &BallPoint,
    x: &ComplexVector,
    y: &ComplexVector,
    tol: &Tolerance,
) -> Result<f64> {
    let lhs = theta(pair, z, tol)?.theta * pair.defect() * join(x, y);
    let diff = x * z.z1 + y * z.z2 - (pair.a1() * x + pair.a2() * y);
    let rhs = pair.defect_star() * resolve(&resolvent_argument(pair, z), &column(&diff), tol)?;
    Ok((column(&lhs) - rhs).norm())
}

/// `‖θ_A(z)*·D_{A*}·x − D_A·(−(A1*x; A2*x) + (z̄1; z̄2) ⊗ (I − z̄1A1 − z̄2A2)^{-1}(I − A1A1* − A2A2*)x)‖`.
pub fn theta_adjoint_defect_residual(pair: &CommutingPair, z: &BallPoint, x: &ComplexVector, tol: &Tolerance) -> Result<f64> {
    let lhs = theta(pair, z, tol)?.theta.adjoint() * pair.defect_star() * x;
    let w = resolve(
        &adjoint_resolvent_argument(pair, z),
        &column(&(pair.defect_star_sq() * x)),
        tol,
    )?;
    let w = w.column(0).into_owned();
    let inner = join(
        &(&w * z.z1.conj() - pair.a1().adjoint() * x),
        &(&w * z.z2.conj() - pair.a2().adjoint() * x),
    );
    Ok((lhs - pair.defect() * inner).norm())
}

fn require_pure_injective(pair: &CommutingPair) -> Result<()> {
    if !pair.is_pure() {
        return Err(Error::HypothesisViolated("pair is not pure"));
    }
    if !pair.defect_star_injective() {
        return Err(Error::HypothesisViolated("D_A* is not injective"));
    }
    Ok(())
}

fn first_column(m: &ComplexMatrix) -> Option<ComplexVector> {
    (m.ncols() > 0).then(|| m.column(0).into_owned())
}

/// Nonzero `x` with `M·(x;0) = 0` and `M·(0;x) = 0` for an `n × 2n` matrix `M`.
pub fn split_kernel_witness(m: &ComplexMatrix, tol: &Tolerance) -> Option<ComplexVector> {
    let n = m.ncols() / 2;
    let stacked = vstack(&m.columns(0, n).into_owned(), &m.columns(n, n).into_owned());
    first_column(&kernel_basis(&stacked, tol))
}

/// σ^(1) through θ: a common `x ≠ 0` with `θ_A(z)D_A(x;0) = θ_A(z)D_A(0;x) = 0`.
pub fn sigma1_via_theta(pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<Option<ComplexVector>> {
    require_pure_injective(pair)?;
    let m = theta(pair, z, tol)?.theta * pair.defect();
    Ok(split_kernel_witness(&m, tol))
}

/// `(x1; x2) ↦ (−x2; x1)`, carrying `ker θ_A(z)D_A` onto `ker B1` at `z`.
pub fn rotate_halves(k: &ComplexMatrix) -> ComplexMatrix {
    let n = k.nrows() / 2;
    vstack(&(-k.rows(n, n).into_owned()), &k.rows(0, n).into_owned())
}

/// Returns a unit vector of `span(candidates)` orthogonal to `ran(b0)` when
/// the span strictly exceeds the range, decided by
/// `rank [candidates | b0] > rank b0`.
pub fn excess_over_range(candidates: &ComplexMatrix, b0: &ComplexMatrix, tol: &Tolerance) -> Option<ComplexVector> {
    let base = numerical_rank(b0, tol);
    if numerical_rank(&hstack(candidates, b0), tol) <= base {
        return None;
    }
    let range = range_basis(b0, tol);
    let residual = candidates - &range * (range.adjoint() * candidates);
    let best = (0..residual.ncols()).max_by(|&a, &b| residual.column(a).norm().total_cmp(&residual.column(b).norm()))?;
    let v = residual.column(best).into_owned();
    let norm = v.norm();
    (norm > 0.0).then(|| v / Complex64::new(norm, 0.0))
}

/// σ^(2) through θ: rotates `ker θ_A(z)D_A` into `ker B1` and looks for a
/// vector outside `ran B0`. The witness lies in `ker B1 ⊖ ran B0`.
pub fn sigma2_via_theta(pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<Option<ComplexVector>> {
    require_pure_injective(pair)?;
    let m = theta(pair, z, tol)?.theta * pair.defect();
    let k = kernel_basis(&m, tol);
    if k.ncols() == 0 {
        return Ok(None);
    }
    let maps = koszul_maps(pair, z, tol)?;
    Ok(excess_over_range(&rotate_halves(&k), &maps.b0, tol))
}

/// σ^(3) through θ: `y ≠ 0` with `θ_A(z)*·D_{A*}·y = 0`.
pub fn sigma3_via_theta(pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<Option<ComplexVector>> {
    if !pair.defect_star_injective() {
        return Err(Error::HypothesisViolated("D_A* is not injective"));
    }
    let m = theta(pair, z, tol)?.theta.adjoint() * pair.defect_star();
    Ok(first_column(&kernel_basis(&m, tol)))
}

/// Splits a vector of `H²` into its halves.
pub fn halves(v: &ComplexVector) -> (ComplexVector, ComplexVector) {
    split(v, v.len() / 2)
}
