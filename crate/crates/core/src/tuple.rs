//! Commuting 2-contractions, their defect operators, and the JSON tuple format.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    ensure_finite, fro, hstack, max_eig_hermitian, numerical_rank, psd_sqrt, ComplexMatrix,
    ComplexVector, Tolerance, ZERO,
};

/// A point `(z1, z2)` of `C²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPoint {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl BallPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        BallPoint { z1, z2 }
    }

    pub fn origin() -> Self {
        BallPoint::new(ZERO, ZERO)
    }

    pub fn real(x1: f64, x2: f64) -> Self {
        BallPoint::new(Complex64::new(x1, 0.0), Complex64::new(x2, 0.0))
    }

    pub fn norm_sq(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn in_ball(&self) -> bool {
        self.norm_sq() < 1.0
    }

    pub fn distance(&self, other: &BallPoint) -> f64 {
        ((self.z1 - other.z1).norm_sqr() + (self.z2 - other.z2).norm_sqr()).sqrt()
    }

    pub fn conj(&self) -> Self {
        BallPoint::new(self.z1.conj(), self.z2.conj())
    }
}

/// A validated commuting pair `(A1, A2)` with `A1·A1* + A2·A2* ≤ I`.
///
/// Immutable once built; all derived quantities are computed up front.
#[derive(Debug, Clone)]
pub struct CommutingPair {
    a1: ComplexMatrix,
    a2: ComplexMatrix,
    defect_star: ComplexMatrix,
    defect: ComplexMatrix,
    purity_index: f64,
    commutator_residual: f64,
    is_pure: bool,
    defect_injective: bool,
    defect_star_injective: bool,
}

impl CommutingPair {
    pub fn n(&self) -> usize {
        self.a1.nrows()
    }
    pub fn a1(&self) -> &ComplexMatrix {
        &self.a1
    }
    pub fn a2(&self) -> &ComplexMatrix {
        &self.a2
    }
    /// `D_{A*} = (I − A1A1* − A2A2*)^{1/2}`, `n × n`.
    pub fn defect_star(&self) -> &ComplexMatrix {
        &self.defect_star
    }
    /// `D_A = (I − A*A)^{1/2}` for the row operator `A = [A1 A2]`, `2n × 2n`.
    pub fn defect(&self) -> &ComplexMatrix {
        &self.defect
    }
    /// Largest eigenvalue of `A1A1* + A2A2*`.
    pub fn purity_index(&self) -> f64 {
        self.purity_index
    }
    pub fn commutator_residual(&self) -> f64 {
        self.commutator_residual
    }
    pub fn is_pure(&self) -> bool {
        self.is_pure
    }
    pub fn defect_injective(&self) -> bool {
        self.defect_injective
    }
    pub fn defect_star_injective(&self) -> bool {
        self.defect_star_injective
    }

    /// The row operator `[A1 A2]` as an `n × 2n` matrix.
    pub fn row(&self) -> ComplexMatrix {
        hstack(&self.a1, &self.a2)
    }

    /// `A1·A1* + A2·A2*`.
    pub fn row_gram(&self) -> ComplexMatrix {
        &self.a1 * self.a1.adjoint() + &self.a2 * self.a2.adjoint()
    }

    /// `I − A1·A1* − A2·A2*`, the square of `D_{A*}` formed directly.
    pub fn defect_star_sq(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.n(), self.n()) - self.row_gram()
    }

    /// `I − A*A` on `H²`, the square of `D_A` formed directly.
    pub fn defect_sq(&self) -> ComplexMatrix {
        let row = self.row();
        ComplexMatrix::identity(2 * self.n(), 2 * self.n()) - row.adjoint() * row
    }
}

pub fn build_pair(a1: ComplexMatrix, a2: ComplexMatrix, tol: &Tolerance) -> Result<CommutingPair> {
    tol.validate()?;
    if !a1.is_square() || a1.shape() != a2.shape() || a1.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "A1 is {}×{}, A2 is {}×{}; both must be the same nonempty square size",
            a1.nrows(),
            a1.ncols(),
            a2.nrows(),
            a2.ncols()
        )));
    }
    ensure_finite(&a1, "A1")?;
    ensure_finite(&a2, "A2")?;
    let n = a1.nrows();

    let commutator_residual = fro(&(&a1 * &a2 - &a2 * &a1));
    if commutator_residual > tol.residual_abs {
        return Err(Error::NotCommuting {
            residual: commutator_residual,
            limit: tol.residual_abs,
        });
    }

    let gram = &a1 * a1.adjoint() + &a2 * a2.adjoint();
    let defect_star = psd_sqrt(&(ComplexMatrix::identity(n, n) - &gram), tol).map_err(|e| {
        Error::NotContraction(format!("I − A1A1* − A2A2* is not positive semidefinite ({e})"))
    })?;
    let row = hstack(&a1, &a2);
    let defect = psd_sqrt(&(ComplexMatrix::identity(2 * n, 2 * n) - row.adjoint() * &row), tol)
        .map_err(|e| Error::NotContraction(format!("I − A*A is not positive semidefinite ({e})")))?;

    let purity_index = max_eig_hermitian(&gram, tol)?;
    let is_pure = purity_index <= 1.0 - tol.purity_margin;
    let defect_injective = numerical_rank(&defect, tol) == 2 * n;
    let defect_star_injective = numerical_rank(&defect_star, tol) == n;
    if defect_injective != defect_star_injective {
        return Err(Error::InjectivityMismatch {
            defect: defect_injective,
            defect_star: defect_star_injective,
        });
    }

    Ok(CommutingPair {
        a1,
        a2,
        defect_star,
        defect,
        purity_index,
        commutator_residual,
        is_pure,
        defect_injective,
        defect_star_injective,
    })
}

/// `A1·h1 + A2·h2` for `x = (h1; h2)` without any validation of the pair.
pub fn row_apply_raw(a1: &ComplexMatrix, a2: &ComplexMatrix, x: &ComplexVector) -> Result<ComplexVector> {
    let n = a1.ncols();
    if x.len() != 2 * n || a2.ncols() != n || a1.nrows() != a2.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot feed a row operator on H² with dim H = {n}",
            x.len()
        )));
    }
    Ok(a1 * x.rows(0, n) + a2 * x.rows(n, n))
}

pub fn row_apply(pair: &CommutingPair, x: &ComplexVector) -> Result<ComplexVector> {
    row_apply_raw(&pair.a1, &pair.a2, x)
}

/// Standard complex normal: independent real and imaginary parts of variance 1/2.
pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn quadratic(coeffs: [Complex64; 3], m: &ComplexMatrix, m2: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    ComplexMatrix::identity(n, n) * coeffs[0] + m * coeffs[1] + m2 * coeffs[2]
}

/// Raw generated matrices `(A1, A2)` before validation.
pub fn gen_commuting_matrices(n: usize, seed: u64, target_norm: f64) -> (ComplexMatrix, ComplexMatrix) {
    assert!(n >= 1, "dimension must be positive");
    assert!(target_norm > 0.0 && target_norm < 1.0, "target norm must lie in (0, 1)");
    let tol = Tolerance::default();
    let mut attempt = seed;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt);
        let scale = 1.0 / (n as f64).sqrt();
        let m = ComplexMatrix::from_fn(n, n, |_, _| complex_normal(&mut rng) * scale);
        let m2 = &m * &m;
        let p = [complex_normal(&mut rng), complex_normal(&mut rng), complex_normal(&mut rng)];
        let q = [complex_normal(&mut rng), complex_normal(&mut rng), complex_normal(&mut rng)];
        let a1 = quadratic(p, &m, &m2);
        let a2 = quadratic(q, &m, &m2);
        let gram = &a1 * a1.adjoint() + &a2 * a2.adjoint();
        let top = max_eig_hermitian(&gram, &tol).unwrap_or(0.0);
        if top > 0.0 {
            let t = Complex64::new(target_norm / top.sqrt(), 0.0);
            return (a1 * t, a2 * t);
        }
        attempt = attempt.wrapping_add(1);
    }
}

/// Deterministic random pure commuting pair: polynomials in one random matrix,
/// jointly rescaled so that the purity index equals `target_norm²`.
pub fn gen_commuting_pure(n: usize, seed: u64, target_norm: f64) -> CommutingPair {
    let (a1, a2) = gen_commuting_matrices(n, seed, target_norm);
    build_pair(a1, a2, &Tolerance::default()).expect("generated pair is a pure commuting contraction")
}

/// On-disk tuple format: `{"n": .., "A1": [[[re, im], ..], ..], "A2": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleFile {
    pub n: usize,
    #[serde(rename = "A1")]
    pub a1: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "A2")]
    pub a2: Vec<Vec<[f64; 2]>>,
}

fn to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_rows(rows: &[Vec<[f64; 2]>], n: usize, name: &str) -> Result<ComplexMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{name} must be an {n}×{n} array")));
    }
    let m = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parse(format!("{name} has non-finite entries")));
    }
    Ok(m)
}

impl TupleFile {
    pub fn from_matrices(a1: &ComplexMatrix, a2: &ComplexMatrix) -> Self {
        TupleFile {
            n: a1.nrows(),
            a1: to_rows(a1),
            a2: to_rows(a2),
        }
    }

    pub fn from_pair(pair: &CommutingPair) -> Self {
        Self::from_matrices(pair.a1(), pair.a2())
    }

    pub fn matrices(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        if self.n == 0 {
            return Err(Error::Parse("n must be at least 1".into()));
        }
        Ok((from_rows(&self.a1, self.n, "A1")?, from_rows(&self.a2, self.n, "A2")?))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("tuple serializes");
        s.push('\n');
        s
    }
}

/// Fixtures used across the test suites.
pub mod fixtures {
    use super::*;
    use crate::numerics::{c, diag};

    pub fn zero(n: usize) -> (ComplexMatrix, ComplexMatrix) {
        (ComplexMatrix::zeros(n, n), ComplexMatrix::zeros(n, n))
    }

    /// `A1 = diag(0.1, 0.2)`, `A2 = diag(0.3, 0.4)`.
    pub fn diagonal() -> (ComplexMatrix, ComplexMatrix) {
        (diag(&[c(0.1, 0.0), c(0.2, 0.0)]), diag(&[c(0.3, 0.0), c(0.4, 0.0)]))
    }

    /// `A1 = [[0, 0.6], [0, 0]]`, `A2 = [[0, 0.3], [0, 0]]`.
    pub fn nilpotent() -> (ComplexMatrix, ComplexMatrix) {
        let mut a1 = ComplexMatrix::zeros(2, 2);
        let mut a2 = ComplexMatrix::zeros(2, 2);
        a1[(0, 1)] = c(0.6, 0.0);
        a2[(0, 1)] = c(0.3, 0.0);
        (a1, a2)
    }

    /// `A1 = A2 = I/√2`: a coisometric, non-pure pair.
    pub fn coisometric(n: usize) -> (ComplexMatrix, ComplexMatrix) {
        let s = ComplexMatrix::identity(n, n) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        (s.clone(), s)
    }

    pub fn build(m: (ComplexMatrix, ComplexMatrix)) -> CommutingPair {
        build_pair(m.0, m.1, &Tolerance::default()).expect("fixture is valid")
    }
}
