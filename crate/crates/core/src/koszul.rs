//! The Koszul complex `0 → H → H² → H → 0` of a shifted commuting pair and
//! the Taylor spectrum it defines.

use nalgebra::linalg::Schur;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{
    column, fro, hermitian_eigen, hstack, kernel_basis, vstack, ComplexMatrix,
    ComplexVector, Tolerance,
};
use crate::tuple::{BallPoint, CommutingPair};

/// Merge radius for joint eigenvalues coming out of the triangular form.
pub const DEDUP_RADIUS: f64 = 1e-6;
const TRIANGULARIZE_ATTEMPTS: usize = 8;
const SPECTRUM_SEED: u64 = 0x6b6f_737a_756c;

/// The two nonzero differentials at a point `z`.
#[derive(Debug, Clone)]
pub struct KoszulMaps {
    /// `x ↦ (A1 − z1)x ⊕ (A2 − z2)x`, `2n × n`.
    pub b0: ComplexMatrix,
    /// `x ⊕ y ↦ −(A2 − z2)x + (A1 − z1)y`, `n × 2n`.
    pub b1: ComplexMatrix,
}

impl KoszulMaps {
    pub fn from_matrices(a1: &ComplexMatrix, a2: &ComplexMatrix, z: &BallPoint) -> Self {
        let n = a1.nrows();
        let id = ComplexMatrix::identity(n, n);
        let s1 = a1 - &id * z.z1;
        let s2 = a2 - &id * z.z2;
        KoszulMaps {
            b0: vstack(&s1, &s2),
            b1: hstack(&(-s2), &s1),
        }
    }

    pub fn complex_residual(&self) -> f64 {
        fro(&(&self.b1 * &self.b0))
    }

    /// Laplacians `B0*B0`, `B0B0* + B1*B1`, `B1B1*` of the three stages.
    pub fn laplacians(&self) -> [ComplexMatrix; 3] {
        [
            self.b0.adjoint() * &self.b0,
            &self.b0 * self.b0.adjoint() + self.b1.adjoint() * &self.b1,
            &self.b1 * self.b1.adjoint(),
        ]
    }
}

pub fn koszul_maps(pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<KoszulMaps> {
    let maps = KoszulMaps::from_matrices(pair.a1(), pair.a2(), z);
    let residual = maps.complex_residual();
    if residual > tol.residual_abs * (1.0 + fro(&maps.b0) * fro(&maps.b1)) {
        return Err(Error::ComplexPropertyViolated { residual });
    }
    Ok(maps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumClassification {
    pub point: BallPoint,
    pub in_sigma1: bool,
    pub in_sigma2: bool,
    pub in_sigma3: bool,
    pub lap0_min: f64,
    pub lap1_min: f64,
    pub lap2_min: f64,
}

impl SpectrumClassification {
    pub fn in_spectrum(&self) -> bool {
        self.in_sigma1 || self.in_sigma2 || self.in_sigma3
    }

    pub fn flags(&self) -> [bool; 3] {
        [self.in_sigma1, self.in_sigma2, self.in_sigma3]
    }
}

/// Smallest eigenvalue of a Laplacian and whether it counts as singular:
/// `λ_min ≤ residual_abs · (1 + ‖L‖)`.
fn laplacian_stage(lap: &ComplexMatrix, tol: &Tolerance) -> Result<(f64, bool)> {
    let (values, _) = hermitian_eigen(lap, tol)?;
    let min = values[0];
    let norm = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok((min, min <= tol.residual_abs * (1.0 + norm)))
}

/// Classification on raw matrices; used directly for adjoint pairs, which
/// need not be row contractions.
pub fn classify_matrices(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    z: &BallPoint,
    tol: &Tolerance,
) -> Result<SpectrumClassification> {
    let maps = KoszulMaps::from_matrices(a1, a2, z);
    let [l0, l1, l2] = maps.laplacians();
    let (lap0_min, in_sigma1) = laplacian_stage(&l0, tol)?;
    let (lap1_min, in_sigma2) = laplacian_stage(&l1, tol)?;
    let (lap2_min, in_sigma3) = laplacian_stage(&l2, tol)?;
    Ok(SpectrumClassification {
        point: *z,
        in_sigma1,
        in_sigma2,
        in_sigma3,
        lap0_min,
        lap1_min,
        lap2_min,
    })
}

pub fn classify_point(pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<SpectrumClassification> {
    classify_matrices(pair.a1(), pair.a2(), z, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub point: BallPoint,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularizationMethod {
    /// Schur form of a random linear combination `c1·A1 + c2·A2`.
    RandomCombination { attempt: usize },
    /// Nested common-eigenvector deflation.
    Staircase,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub points: Vec<SpectrumPoint>,
    pub classifications: Vec<SpectrumClassification>,
    pub method: TriangularizationMethod,
}

impl SpectrumResult {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Distance from `z` to the nearest spectrum point.
    pub fn distance_to(&self, z: &BallPoint) -> f64 {
        self.points
            .iter()
            .map(|p| p.point.distance(z))
            .fold(f64::INFINITY, f64::min)
    }
}

fn strictly_lower_norm(m: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

fn diagonal_pairs(t1: &ComplexMatrix, t2: &ComplexMatrix) -> Vec<BallPoint> {
    (0..t1.nrows()).map(|i| BallPoint::new(t1[(i, i)], t2[(i, i)])).collect()
}

/// Joint eigenvalues from the Schur basis of `c1·A1 + c2·A2`, or `None` when
/// that basis fails to triangularize both matrices.
pub fn combination_points(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    c1: Complex64,
    c2: Complex64,
    tol: &Tolerance,
) -> Option<Vec<BallPoint>> {
    let combo = a1 * c1 + a2 * c2;
    let (q, _) = Schur::try_new(combo, f64::EPSILON, 0)?.unpack();
    let t1 = q.adjoint() * a1 * &q;
    let t2 = q.adjoint() * a2 * &q;
    let ok = strictly_lower_norm(&t1) <= tol.residual_abs * (1.0 + fro(a1))
        && strictly_lower_norm(&t2) <= tol.residual_abs * (1.0 + fro(a2));
    ok.then(|| diagonal_pairs(&t1, &t2))
}

fn first_eigenpair(m: &ComplexMatrix) -> Option<(Complex64, ComplexVector)> {
    let (q, t) = Schur::try_new(m.clone(), f64::EPSILON, 0)?.unpack();
    Some((t[(0, 0)], q.column(0).into_owned()))
}

/// Joint eigenvalues by repeated deflation of a common eigenvector.
///
/// On the current invariant complement `V`, take an eigenvalue `μ` of the
/// compression of `A1`, restrict the compression of `A2` to the (loosely
/// thresholded) eigenspace of `μ`, and pick an eigenvector there.
pub fn staircase_points(a1: &ComplexMatrix, a2: &ComplexMatrix, tol: &Tolerance) -> Option<Vec<BallPoint>> {
    let n = a1.nrows();
    let scale = 1.0 + fro(a1) + fro(a2);
    let loose = tol.residual_abs.sqrt().max(1e-6) * scale;
    let mut basis = ComplexMatrix::identity(n, n);
    let mut points = Vec::with_capacity(n);
    while basis.ncols() > 0 {
        let k = basis.ncols();
        let c1 = basis.adjoint() * a1 * &basis;
        let c2 = basis.adjoint() * a2 * &basis;
        let (mu, _) = first_eigenpair(&c1)?;
        let shifted = &c1 - ComplexMatrix::identity(k, k) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let sigma = &svd.singular_values;
        let smallest = sigma.iter().fold(f64::INFINITY, |a, &s| a.min(s));
        let cut = loose.max(smallest);
        let picked: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= cut).collect();
        let eigenspace = ComplexMatrix::from_fn(k, picked.len(), |r, j| v_t[(picked[j], r)].conj());
        let restricted = eigenspace.adjoint() * &c2 * &eigenspace;
        let (_, w) = first_eigenpair(&restricted)?;
        let v = &eigenspace * w;
        let v = v.unscale(v.norm());
        let mu1 = (v.adjoint() * &c1 * &v)[(0, 0)];
        let mu2 = (v.adjoint() * &c2 * &v)[(0, 0)];
        let r1 = (&c1 * &v - &v * mu1).norm();
        let r2 = (&c2 * &v - &v * mu2).norm();
        if r1 > loose || r2 > loose {
            return None;
        }
        points.push(BallPoint::new(mu1, mu2));
        let complement = kernel_basis(&column(&v).adjoint(), tol);
        basis = &basis * complement;
    }
    Some(points)
}

/// Greedy merge of points closer than `radius`, keeping the running mean.
pub fn deduplicate(points: &[BallPoint], radius: f64) -> Vec<SpectrumPoint> {
    let mut out: Vec<SpectrumPoint> = Vec::new();
    for p in points {
        match out.iter_mut().find(|q| q.point.distance(p) <= radius) {
            Some(q) => {
                let m = q.multiplicity as f64;
                q.point = BallPoint::new(
                    (q.point.z1 * m + p.z1) / (m + 1.0),
                    (q.point.z2 * m + p.z2) / (m + 1.0),
                );
                q.multiplicity += 1;
            }
            None => out.push(SpectrumPoint { point: *p, multiplicity: 1 }),
        }
    }
    out
}

fn seeded_coefficient(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn taylor_spectrum(pair: &CommutingPair, tol: &Tolerance) -> Result<SpectrumResult> {
    let (a1, a2) = (pair.a1(), pair.a2());
    let mut rng = ChaCha8Rng::seed_from_u64(SPECTRUM_SEED);
    let mut found = None;
    for attempt in 0..TRIANGULARIZE_ATTEMPTS {
        let c1 = seeded_coefficient(&mut rng);
        let c2 = seeded_coefficient(&mut rng);
        if let Some(points) = combination_points(a1, a2, c1, c2, tol) {
            found = Some((points, TriangularizationMethod::RandomCombination { attempt }));
            break;
        }
    }
    let (raw, method) = match found {
        Some(f) => f,
        None => (
            staircase_points(a1, a2, tol).ok_or(Error::TriangularizationFailed)?,
            TriangularizationMethod::Staircase,
        ),
    };
    let points = deduplicate(&raw, DEDUP_RADIUS);
    let classifications = points
        .iter()
        .map(|p| classify_point(pair, &p.point, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        points,
        classifications,
        method,
    })
}

/// Symmetric Hausdorff distance between two finite point sets in `C²`.
pub fn hausdorff(a: &[BallPoint], b: &[BallPoint]) -> f64 {
    let directed = |x: &[BallPoint], y: &[BallPoint]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.distance(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed(a, b).max(directed(b, a))
}

/// Rank-count oracle: returns `(rank B0, dim ker B1, rank B1)`.
pub fn rank_profile(maps: &KoszulMaps, tol: &Tolerance) -> (usize, usize, usize) {
    let r0 = crate::numerics::numerical_rank(&maps.b0, tol);
    let r1 = crate::numerics::numerical_rank(&maps.b1, tol);
    (r0, maps.b1.ncols() - r1, r1)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, diag};
    use crate::tuple::fixtures::{self, build};
    use crate::tuple::gen_commuting_pure;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn maps_of_zero_pair() {
        let p = build(fixtures::zero(3));
        let m = koszul_maps(&p, &BallPoint::origin(), &tol()).unwrap();
        assert_eq!(fro(&m.b0) + fro(&m.b1), 0.0);
        let z = BallPoint::new(c(0.2, 0.1), c(-0.3, 0.0));
        let m = koszul_maps(&p, &z, &tol()).unwrap();
        let id = ComplexMatrix::identity(3, 3);
        assert!(fro(&(m.b0 - vstack(&(&id * -z.z1), &(&id * -z.z2)))) < 1e-15);
        assert!(fro(&(m.b1 - hstack(&(&id * z.z2), &(&id * -z.z1)))) < 1e-15);
    }

    #[test]
    fn nilpotent_complex_closes_exactly() {
        let p = build(fixtures::nilpotent());
        let m = koszul_maps(&p, &BallPoint::origin(), &tol()).unwrap();
        assert_eq!(m.complex_residual(), 0.0);
    }

    #[test]
    fn classification_examples() {
        let zero = build(fixtures::zero(3));
        let cl = classify_point(&zero, &BallPoint::origin(), &tol()).unwrap();
        assert_eq!(cl.flags(), [true, true, true]);

        let z = BallPoint::real(0.3, 0.0);
        let cl = classify_point(&zero, &z, &tol()).unwrap();
        assert_eq!(cl.flags(), [false, false, false]);
        let maps = koszul_maps(&zero, &z, &tol()).unwrap();
        assert_eq!(rank_profile(&maps, &tol()), (3, 3, 3));

        let nil = build(fixtures::nilpotent());
        let cl = classify_point(&nil, &BallPoint::origin(), &tol()).unwrap();
        assert_eq!(cl.flags(), [true, true, true]);
        let maps = koszul_maps(&nil, &BallPoint::origin(), &tol()).unwrap();
        assert_eq!(rank_profile(&maps, &tol()), (1, 3, 1));
    }

    #[test]
    fn spectrum_examples() {
        let s = taylor_spectrum(&build(fixtures::zero(3)), &tol()).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].multiplicity, 3);
        assert!(s.points[0].point.distance(&BallPoint::origin()) < 1e-14);

        let s = taylor_spectrum(&build(fixtures::diagonal()), &tol()).unwrap();
        let got: Vec<BallPoint> = s.points.iter().map(|p| p.point).collect();
        let want = [BallPoint::real(0.1, 0.3), BallPoint::real(0.2, 0.4)];
        assert!(hausdorff(&got, &want) < 1e-12);
        assert!(s.classifications.iter().all(|c| c.flags() == [true, true, true]));

        let s = taylor_spectrum(&build(fixtures::nilpotent()), &tol()).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].multiplicity, 2);
        assert!(s.points[0].point.norm_sq() < 1e-24);
    }

    #[test]
    fn staircase_matches_schur_route() {
        for seed in 0..10 {
            let p = gen_commuting_pure(5, seed, 0.8);
            let stair = staircase_points(p.a1(), p.a2(), &tol()).unwrap();
            let schur = taylor_spectrum(&p, &tol()).unwrap();
            let schur_pts: Vec<BallPoint> = schur.points.iter().map(|q| q.point).collect();
            assert!(hausdorff(&stair, &schur_pts) < 1e-8, "seed {seed}");
        }
        // Derogatory case where a combination has repeated eigenvalues.
        let a1 = diag(&[c(0.1, 0.0), c(0.1, 0.0), c(0.2, 0.0)]);
        let mut a2 = diag(&[c(0.3, 0.0), c(0.3, 0.0), c(0.1, 0.0)]);
        a2[(0, 1)] = c(0.05, 0.0);
        let pts = staircase_points(&a1, &a2, &tol()).unwrap();
        let merged = deduplicate(&pts, DEDUP_RADIUS);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged.iter().map(|p| p.multiplicity).sum::<usize>(), 3);
    }

    #[test]
    fn adjoint_duality_on_fixtures() {
        for pair in [build(fixtures::diagonal()), build(fixtures::nilpotent()), gen_commuting_pure(4, 3, 0.9)] {
            let spec = taylor_spectrum(&pair, &tol()).unwrap();
            for p in &spec.points {
                let cl = classify_point(&pair, &p.point, &tol()).unwrap();
                assert!(cl.in_sigma1);
                let dual = classify_matrices(&pair.a1().adjoint(), &pair.a2().adjoint(), &p.point.conj(), &tol()).unwrap();
                assert!(dual.in_sigma3);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn complex_property_and_partition(n in 2usize..6, seed in 0u64..5000, x in -0.7f64..0.7, y in -0.7f64..0.7) {
            let p = gen_commuting_pure(n, seed, 0.85);
            let z = BallPoint::new(c(x, 0.1), c(y, -0.05));
            let maps = koszul_maps(&p, &z, &tol()).unwrap();
            prop_assert!(maps.complex_residual() <= 1e-10 * (1.0 + fro(&maps.b0) * fro(&maps.b1)));
            let spec = taylor_spectrum(&p, &tol()).unwrap();
            let cl = classify_point(&p, &z, &tol()).unwrap();
            if spec.distance_to(&z) > 1e-3 {
                prop_assert_eq!(cl.flags(), [false, false, false]);
            }
            for (sp, cl) in spec.points.iter().zip(&spec.classifications) {
                prop_assert!(cl.in_spectrum());
                prop_assert!(sp.point.norm_sq() <= 1.0 + 1e-8);
            }
        }
    }
}
