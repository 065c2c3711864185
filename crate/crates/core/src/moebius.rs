//! Involutive automorphisms `Φ_λ` of the unit ball of `C²`, their action on
//! commuting 2-contractions, and the unitaries `Ω`, `Ω*` relating the two
//! characteristic functions.
//!
//! Notation: `Λ = [λ1·I  λ2·I]` is the row operator of `λ`, `s = √(1 − ‖λ‖²)`,
//! `D_{Λ*} = s·I` and `D_Λ = (I − Λ*Λ)^{1/2}`, which is block-scalar.

use num_complex::Complex64;

use crate::charfn::{excess_over_range, rotate_halves, split_kernel_witness, theta, theta_matrix};
use crate::error::{Error, Result};
use crate::koszul::{classify_point, KoszulMaps};
use crate::numerics::{
    block2, fro, hstack, inverse, kernel_basis, scaled_identity, solve, ComplexMatrix,
    ComplexVector, Tolerance,
};
use crate::tuple::{build_pair, BallPoint, CommutingPair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Automorphism {
    lambda1: Complex64,
    lambda2: Complex64,
    norm_sq: f64,
    s: f64,
    /// Scalar 2×2 pattern of `D_Λ`; the operator is `coeff[i][j]·I` blockwise.
    d_coeffs: [[Complex64; 2]; 2],
}

impl Automorphism {
    pub fn new(lambda1: Complex64, lambda2: Complex64) -> Result<Self> {
        let norm_sq = lambda1.norm_sqr() + lambda2.norm_sqr();
        if !norm_sq.is_finite() || norm_sq == 0.0 {
            return Err(Error::BadLambda("λ must be nonzero".into()));
        }
        if norm_sq >= 1.0 {
            return Err(Error::BadLambda(format!("|λ1|² + |λ2|² = {norm_sq} is not below 1")));
        }
        let s = (1.0 - norm_sq).sqrt();
        let w1 = lambda1.norm_sqr();
        let w2 = lambda2.norm_sqr();
        let r = |x: f64| Complex64::new(x / norm_sq, 0.0);
        let off = lambda1.conj() * lambda2 * ((s - 1.0) / norm_sq);
        let d_coeffs = [[r(w2 + w1 * s), off], [off.conj(), r(w1 + w2 * s)]];
        Ok(Automorphism {
            lambda1,
            lambda2,
            norm_sq,
            s,
            d_coeffs,
        })
    }

    pub fn from_point(lambda: &BallPoint) -> Result<Self> {
        Self::new(lambda.z1, lambda.z2)
    }

    pub fn lambda(&self) -> BallPoint {
        BallPoint::new(self.lambda1, self.lambda2)
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `s = √(1 − ‖λ‖²)`; `D_{Λ*} = s·I`.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn d_lambda_star_scale(&self) -> f64 {
        self.s
    }

    /// `D_Λ` on `H²` with `dim H = n`, from the closed-form block pattern.
    pub fn d_lambda(&self, n: usize) -> ComplexMatrix {
        let k = self.d_coeffs;
        block2(
            &scaled_identity(n, k[0][0]),
            &scaled_identity(n, k[0][1]),
            &scaled_identity(n, k[1][0]),
            &scaled_identity(n, k[1][1]),
        )
    }

    /// `Λ = [λ1·I  λ2·I]`, `n × 2n`.
    pub fn lambda_row(&self, n: usize) -> ComplexMatrix {
        hstack(&scaled_identity(n, self.lambda1), &scaled_identity(n, self.lambda2))
    }
}

/// `Φ_λ(z) = λ − s/(1 − ⟨z,λ⟩) · (z − (1 − s)·⟨z,λ⟩/‖λ‖² · λ)`.
pub fn phi_point(auto: &Automorphism, z: &BallPoint) -> Result<BallPoint> {
    if !z.in_ball() {
        return Err(Error::OutsideBall(z.norm_sq()));
    }
    let (l1, l2) = (auto.lambda1, auto.lambda2);
    let inner = z.z1 * l1.conj() + z.z2 * l2.conj();
    let s = auto.s;
    let factor = Complex64::new(s, 0.0) / (Complex64::new(1.0, 0.0) - inner);
    let proj = inner * ((1.0 - s) / auto.norm_sq);
    Ok(BallPoint::new(
        l1 - factor * (z.z1 - proj * l1),
        l2 - factor * (z.z2 - proj * l2),
    ))
}

fn resolvent_error(e: Error) -> Error {
    match e {
        Error::Singular { .. } => Error::ResolventSingular,
        other => other,
    }
}

/// `I − AΛ* = I − λ̄1·A1 − λ̄2·A2`.
fn lambda_shift(auto: &Automorphism, a1: &ComplexMatrix, a2: &ComplexMatrix) -> ComplexMatrix {
    let n = a1.nrows();
    ComplexMatrix::identity(n, n) - a1 * auto.lambda1.conj() - a2 * auto.lambda2.conj()
}

/// `Λ − s·(I − AΛ*)^{-1}·A·D_Λ` as an `n × 2n` matrix.
pub fn phi_row(auto: &Automorphism, a1: &ComplexMatrix, a2: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let n = a1.nrows();
    let row = hstack(a1, a2);
    let middle = solve(&lambda_shift(auto, a1, a2), &(row * auto.d_lambda(n)), tol).map_err(resolvent_error)?;
    Ok(auto.lambda_row(n) - middle * Complex64::new(auto.s, 0.0))
}

/// `Φ_λ(A)`, re-validated as a commuting 2-contraction.
pub fn phi_tuple(auto: &Automorphism, pair: &CommutingPair, tol: &Tolerance) -> Result<CommutingPair> {
    let n = pair.n();
    let m = phi_row(auto, pair.a1(), pair.a2(), tol)?;
    let b1 = m.columns(0, n).into_owned();
    let b2 = m.columns(n, n).into_owned();
    build_pair(b1, b2, tol).map_err(|e| Error::ValidationFailed(format!("Φλ(A) is not a commuting 2-contraction: {e}")))
}

/// Scalar-coefficient form of `(B1(λ), B2(λ))`:
///
/// `B1 = λ1·I − s/‖λ‖² · R·(A1(|λ2|² + |λ1|²s) + λ1λ̄2(s − 1)A2)`
/// `B2 = λ2·I − s/‖λ‖² · R·(λ̄1λ2(s − 1)A1 + A2(|λ1|² + |λ2|²s))`
///
/// with `R = (I − λ̄1A1 − λ̄2A2)^{-1}` computed as an explicit inverse.
pub fn explicit_components(
    auto: &Automorphism,
    pair: &CommutingPair,
    tol: &Tolerance,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (l1, l2, s, nsq) = (auto.lambda1, auto.lambda2, auto.s, auto.norm_sq);
    let (a1, a2) = (pair.a1(), pair.a2());
    let n = pair.n();
    let r = inverse(&lambda_shift(auto, a1, a2), tol).map_err(resolvent_error)?;
    let w1 = l1.norm_sqr();
    let w2 = l2.norm_sqr();
    let k = Complex64::new(s / nsq, 0.0);
    let inner1 = a1 * Complex64::new(w2 + w1 * s, 0.0) + a2 * (l1 * l2.conj() * (s - 1.0));
    let inner2 = a1 * (l1.conj() * l2 * (s - 1.0)) + a2 * Complex64::new(w1 + w2 * s, 0.0);
    let b1 = scaled_identity(n, l1) - &r * inner1 * k;
    let b2 = scaled_identity(n, l2) - &r * inner2 * k;
    Ok((b1, b2))
}

/// `(I − Λ*A)^{-1}` by the block formula
/// `[[R(I − λ̄2A2), λ̄1·A2R], [λ̄2·A1R, R(I − λ̄1A1)]]`, `R = (I − λ̄1A1 − λ̄2A2)^{-1}`.
pub fn block_resolvent(auto: &Automorphism, pair: &CommutingPair, tol: &Tolerance) -> Result<ComplexMatrix> {
    let (a1, a2) = (pair.a1(), pair.a2());
    let n = pair.n();
    let (c1, c2) = (auto.lambda1.conj(), auto.lambda2.conj());
    let id = ComplexMatrix::identity(n, n);
    let r = inverse(&lambda_shift(auto, a1, a2), tol).map_err(resolvent_error)?;
    Ok(block2(
        &(&r * (&id - a2 * c2)),
        &(a2 * &r * c1),
        &(a1 * &r * c2),
        &(&r * (&id - a1 * c1)),
    ))
}

/// `(I − Λ*A)^{-1}` by direct inversion of the `2n × 2n` matrix.
pub fn direct_block_resolvent(auto: &Automorphism, pair: &CommutingPair, tol: &Tolerance) -> Result<ComplexMatrix> {
    let n = pair.n();
    let lam = auto.lambda_row(n);
    let m = ComplexMatrix::identity(2 * n, 2 * n) - lam.adjoint() * pair.row();
    inverse(&m, tol).map_err(resolvent_error)
}

#[derive(Debug, Clone)]
pub struct OmegaPair {
    /// `Ω = D_A (I − Λ*A)^{-1} D_Λ D_{Φλ(A)}^{-1}`, `2n × 2n`.
    pub omega: ComplexMatrix,
    /// `Ω* = D_{A*} (I − ΛA*)^{-1} D_{Λ*} D_{Φλ(A)*}^{-1}`, `n × n`.
    pub omega_star: ComplexMatrix,
    pub transformed: CommutingPair,
    /// `‖block formula − direct inverse‖` for `(I − Λ*A)^{-1}`.
    pub block_resolvent_residual: f64,
}

fn defect_inverse(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    inverse(m, tol).map_err(|e| match e {
        Error::Singular { .. } => Error::DefectSingular,
        other => other,
    })
}

pub fn omega_pair(auto: &Automorphism, pair: &CommutingPair, tol: &Tolerance) -> Result<OmegaPair> {
    if !pair.is_pure() || !pair.defect_star_injective() {
        return Err(Error::HypothesisViolated("Ω needs a pure pair with injective defects"));
    }
    let n = pair.n();
    let transformed = phi_tuple(auto, pair, tol)?;
    let block = block_resolvent(auto, pair, tol)?;
    let direct = direct_block_resolvent(auto, pair, tol)?;
    let block_resolvent_residual = fro(&(&block - &direct));
    if block_resolvent_residual > tol.residual_abs * (1.0 + fro(&direct)) {
        return Err(Error::ValidationFailed(format!(
            "block resolvent disagrees with direct inverse by {block_resolvent_residual:.3e}"
        )));
    }
    let omega = pair.defect() * &block * auto.d_lambda(n) * defect_inverse(transformed.defect(), tol)?;
    // (I − ΛA*)^{-1} is the adjoint of (I − AΛ*)^{-1}.
    let r = inverse(&lambda_shift(auto, pair.a1(), pair.a2()), tol).map_err(resolvent_error)?;
    let omega_star = pair.defect_star()
        * r.adjoint()
        * Complex64::new(auto.s, 0.0)
        * defect_inverse(transformed.defect_star(), tol)?;
    Ok(OmegaPair {
        omega,
        omega_star,
        transformed,
        block_resolvent_residual,
    })
}

/// `‖U*U − I‖_F`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    fro(&(u.adjoint() * u - ComplexMatrix::identity(n, n)))
}

/// `‖Ω*·θ_{Φλ(A)}(z) + θ_A(Φλ(z))·Ω‖` for a precomputed `Ω` pair.
///
/// The two characteristic functions agree up to the unitaries and a sign.
pub fn intertwine_residual_with(
    omegas: &OmegaPair,
    auto: &Automorphism,
    pair: &CommutingPair,
    z: &BallPoint,
    tol: &Tolerance,
) -> Result<f64> {
    let w = phi_point(auto, z)?;
    let moved = &omegas.transformed;
    let theta_moved = theta_matrix(moved.a1(), moved.a2(), moved.defect_star(), moved.defect(), z, tol)?;
    let theta_orig = theta(pair, &w, tol)?.theta;
    Ok(fro(&(&omegas.omega_star * theta_moved + theta_orig * &omegas.omega)))
}

pub fn intertwine_residual(auto: &Automorphism, pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<f64> {
    let omegas = omega_pair(auto, pair, tol)?;
    intertwine_residual_with(&omegas, auto, pair, z, tol)
}

/// Residuals of the two defect identities for `Φ_λ(A)`:
///
/// `I − Φ*Φ = D_Λ (I − A*Λ)^{-1} (I − A*A) (I − Λ*A)^{-1} D_Λ`
/// `I − ΦΦ* = D_{Λ*} (I − AΛ*)^{-1} (I − AA*) (I − ΛA*)^{-1} D_{Λ*}`
pub fn defect_identity_residuals(auto: &Automorphism, pair: &CommutingPair, tol: &Tolerance) -> Result<(f64, f64)> {
    let n = pair.n();
    let phi = phi_row(auto, pair.a1(), pair.a2(), tol)?;
    let row = pair.row();
    let lam = auto.lambda_row(n);
    let id_n = ComplexMatrix::identity(n, n);
    let id_2n = ComplexMatrix::identity(2 * n, 2 * n);
    let dl = auto.d_lambda(n);

    let right = inverse(&(&id_2n - lam.adjoint() * &row), tol).map_err(resolvent_error)?;
    let left = inverse(&(&id_2n - row.adjoint() * &lam), tol).map_err(resolvent_error)?;
    let rhs1 = &dl * left * (&id_2n - row.adjoint() * &row) * right * &dl;
    let r1 = fro(&(&id_2n - phi.adjoint() * &phi - rhs1));

    let right = inverse(&(&id_n - &lam * row.adjoint()), tol).map_err(resolvent_error)?;
    let left = inverse(&(&id_n - &row * lam.adjoint()), tol).map_err(resolvent_error)?;
    let rhs2 = left * (&id_n - &row * row.adjoint()) * right * Complex64::new(auto.s * auto.s, 0.0);
    let r2 = fro(&(&id_n - &phi * phi.adjoint() - rhs2));
    Ok((r1, r2))
}

/// Outcome of the σ^(1) transport test at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma1MapReport {
    /// `θ_A(z)D_A` kills both `T(y;0)` and `T(0;y)` for some `y ≠ 0`,
    /// where `T = (I − Λ*A)^{-1} D_Λ`.
    pub criterion: bool,
    /// `Φλ(z) ∈ σ^(1)(Φλ(A))` by Koszul classification.
    pub transformed_in_sigma1: bool,
    /// `θ_A(z)D_A` kills `(x;0)` and `(0;x)` for some `x ≠ 0`.
    pub direct_criterion: bool,
    pub witness_residual: Option<f64>,
}

impl Sigma1MapReport {
    pub fn agrees(&self) -> bool {
        self.criterion == self.transformed_in_sigma1
    }

    /// All four structured vectors annihilated at once.
    pub fn four_vector_case(&self) -> bool {
        self.criterion && self.direct_criterion
    }
}

fn require_pure(pair: &CommutingPair) -> Result<()> {
    if !pair.is_pure() || !pair.defect_star_injective() {
        return Err(Error::HypothesisViolated("pair must be pure with injective defects"));
    }
    Ok(())
}

/// `T = (I − Λ*A)^{-1} D_Λ`, the map with `Ω·D_{Φλ(A)} = D_A·T`.
pub fn transport(auto: &Automorphism, pair: &CommutingPair, tol: &Tolerance) -> Result<ComplexMatrix> {
    Ok(direct_block_resolvent(auto, pair, tol)? * auto.d_lambda(pair.n()))
}

pub fn map_sigma1_check(auto: &Automorphism, pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<Sigma1MapReport> {
    require_pure(pair)?;
    let n = pair.n();
    let kernel_map = theta(pair, z, tol)?.theta * pair.defect();
    let m = &kernel_map * transport(auto, pair, tol)?;
    let witness = split_kernel_witness(&m, tol);
    let witness_residual = witness.as_ref().map(|y| {
        let top = m.columns(0, n) * y;
        let bottom = m.columns(n, n) * y;
        top.norm().max(bottom.norm())
    });
    let moved = phi_tuple(auto, pair, tol)?;
    let w = phi_point(auto, z)?;
    let transformed_in_sigma1 = classify_point(&moved, &w, tol)?.in_sigma1;
    Ok(Sigma1MapReport {
        criterion: witness.is_some(),
        transformed_in_sigma1,
        direct_criterion: split_kernel_witness(&kernel_map, tol).is_some(),
        witness_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sigma2MapReport {
    /// `ker θ_A(z)D_A`, carried to `ker B1(Φλ(A) − Φλ(z))`, exceeds
    /// `{((B1(λ) − w1)h; (B2(λ) − w2)h)}`.
    pub criterion: bool,
    pub transformed_in_sigma2: bool,
}

impl Sigma2MapReport {
    pub fn agrees(&self) -> bool {
        self.criterion == self.transformed_in_sigma2
    }
}

pub fn map_sigma2_check(auto: &Automorphism, pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<Sigma2MapReport> {
    require_pure(pair)?;
    let kernel = kernel_basis(&(theta(pair, z, tol)?.theta * pair.defect()), tol);
    let moved = phi_tuple(auto, pair, tol)?;
    let w = phi_point(auto, z)?;
    let transformed_in_sigma2 = classify_point(&moved, &w, tol)?.in_sigma2;
    let criterion = if kernel.ncols() == 0 {
        false
    } else {
        let pulled = solve(&transport(auto, pair, tol)?, &kernel, tol).map_err(resolvent_error)?;
        let b0 = KoszulMaps::from_matrices(moved.a1(), moved.a2(), &w).b0;
        excess_over_range(&rotate_halves(&pulled), &b0, tol).is_some()
    };
    Ok(Sigma2MapReport {
        criterion,
        transformed_in_sigma2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sigma3MapReport {
    /// `ker θ_A(z)*D_{A*} ≠ 0`.
    pub has_adjoint_witness: bool,
    /// `‖θ_{Φλ(A)}(Φλ(z))*·D_{Φλ(A)*}·X‖ / ‖X‖` for `X = s^{-1}(I − ΛA*)y`.
    pub transformed_witness_residual: Option<f64>,
    pub transformed_in_sigma3: Option<bool>,
}

impl Sigma3MapReport {
    /// The sufficient condition, when it applies, produced a valid witness
    /// and a point of `σ^(3)(Φλ(A))`.
    pub fn holds(&self, tol: &Tolerance) -> bool {
        if !self.has_adjoint_witness {
            return true;
        }
        self.transformed_witness_residual.is_some_and(|r| r <= tol.residual_abs) && self.transformed_in_sigma3 == Some(true)
    }
}

pub fn map_sigma3_check(auto: &Automorphism, pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<Sigma3MapReport> {
    if !pair.defect_star_injective() {
        return Err(Error::HypothesisViolated("D_A* is not injective"));
    }
    let adjoint_map = theta(pair, z, tol)?.theta.adjoint() * pair.defect_star();
    let kernel = kernel_basis(&adjoint_map, tol);
    if kernel.ncols() == 0 {
        return Ok(Sigma3MapReport {
            has_adjoint_witness: false,
            transformed_witness_residual: None,
            transformed_in_sigma3: None,
        });
    }
    let y: ComplexVector = kernel.column(0).into_owned();
    let (l1, l2) = (auto.lambda1, auto.lambda2);
    let x = (&y - pair.a1().adjoint() * &y * l1 - pair.a2().adjoint() * &y * l2).unscale(auto.s);
    let moved = phi_tuple(auto, pair, tol)?;
    let w = phi_point(auto, z)?;
    let theta_moved = theta(&moved, &w, tol)?.theta;
    let residual = (theta_moved.adjoint() * moved.defect_star() * &x).norm() / x.norm();
    Ok(Sigma3MapReport {
        has_adjoint_witness: true,
        transformed_witness_residual: Some(residual),
        transformed_in_sigma3: Some(classify_point(&moved, &w, tol)?.in_sigma3),
    })
}
