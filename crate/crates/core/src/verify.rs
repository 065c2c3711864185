//! Seeded property suite over generated pairs. Every invariant of the
//! library is evaluated on each trial and the worst value per property is
//! compared against a fixed limit.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charfn::{theta_defect_residual, theta_adjoint_defect_residual, sigma1_via_theta, sigma2_via_theta, sigma3_via_theta};
use crate::error::Result;
use crate::koszul::{classify_point, hausdorff, koszul_maps, taylor_spectrum};
use crate::moebius::{
    block_resolvent, direct_block_resolvent, explicit_components, intertwine_residual_with, map_sigma1_check,
    map_sigma2_check, map_sigma3_check, omega_pair, phi_point, phi_tuple, defect_identity_residuals, unitarity_defect,
    Automorphism,
};
use crate::numerics::{fro, psd_sqrt, ComplexMatrix, ComplexVector, Tolerance};
use crate::tuple::{build_pair, complex_normal, gen_commuting_pure, BallPoint, CommutingPair};

/// Norm used when generating pairs for the suite.
pub const TRIAL_NORM: f64 = 0.9;

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| complex_normal(rng))
}

/// Uniform in the box, rejected outside the ball of the given radius.
pub fn random_ball_point(rng: &mut ChaCha8Rng, radius: f64) -> BallPoint {
    loop {
        let mut coord = || rng.random_range(-radius..radius);
        let z = BallPoint::new(
            num_complex::Complex64::new(coord(), coord()),
            num_complex::Complex64::new(coord(), coord()),
        );
        if z.norm_sq() < radius * radius {
            return z;
        }
    }
}

/// A nonzero `λ` in the ball of radius 0.9, away from the origin.
pub fn random_automorphism(rng: &mut ChaCha8Rng) -> Automorphism {
    loop {
        let l = random_ball_point(rng, 0.9);
        if l.norm_sq() > 1e-4 {
            return Automorphism::from_point(&l).expect("λ sampled inside the ball");
        }
    }
}

/// Random ball point at distance at least `gap` from every listed point.
pub fn random_point_away_from(rng: &mut ChaCha8Rng, radius: f64, avoid: &[BallPoint], gap: f64) -> BallPoint {
    loop {
        let z = random_ball_point(rng, radius);
        if avoid.iter().all(|p| p.distance(&z) >= gap) {
            return z;
        }
    }
}

/// Deliberate corruption of one check, used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Evaluates `Ω` of a rescaled pair against `θ` of the original one.
    CorruptIntertwining,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerance,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub worst: f64,
    pub limit: f64,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.worst <= self.limit
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(PropertyResult::passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify n={} trials={} seed={}", self.n, self.trials, self.seed)?;
        for p in &self.properties {
            let verdict = if p.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{:<28} max {:.3e}  limit {:.1e}  {verdict}", p.name, p.worst, p.limit)?;
        }
        let failed = self.properties.iter().filter(|p| !p.passed()).count();
        if failed == 0 {
            writeln!(f, "all {} properties pass", self.properties.len())
        } else {
            writeln!(f, "{failed} of {} properties FAILED", self.properties.len())
        }
    }
}

/// Running maxima keyed by property, kept in first-seen order.
struct Tally(Vec<PropertyResult>);

impl Tally {
    fn record(&mut self, name: &'static str, limit: f64, value: f64) {
        // Errors during evaluation are recorded as infinite residuals.
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.0.iter_mut().find(|p| p.name == name) {
            Some(p) => p.worst = p.worst.max(value),
            None => self.0.push(PropertyResult { name, worst: value, limit }),
        }
    }

    fn record_result(&mut self, name: &'static str, limit: f64, value: Result<f64>) {
        self.record(name, limit, value.unwrap_or(f64::INFINITY));
    }

    /// Records 0 for agreement and 1 for a counterexample.
    fn record_agreement(&mut self, name: &'static str, agrees: Option<bool>) {
        self.record(name, 0.0, if agrees == Some(true) { 0.0 } else { 1.0 });
    }
}

fn with_fault(pair: &CommutingPair, fault: Option<Fault>, tol: &Tolerance) -> CommutingPair {
    match fault {
        Some(Fault::CorruptIntertwining) => {
            let half = num_complex::Complex64::new(0.5, 0.0);
            build_pair(pair.a1() * half, pair.a2() * half, tol).expect("rescaled pair stays valid")
        }
        None => pair.clone(),
    }
}

fn defect_squares(pair: &CommutingPair) -> f64 {
    let star = fro(&(pair.defect_star() * pair.defect_star() - pair.defect_star_sq()));
    let plain = fro(&(pair.defect() * pair.defect() - pair.defect_sq()));
    star.max(plain)
}

fn theta_criteria_agree(pair: &CommutingPair, z: &BallPoint, tol: &Tolerance) -> Result<[bool; 3]> {
    let cls = classify_point(pair, z, tol)?;
    Ok([
        sigma1_via_theta(pair, z, tol)?.is_some() == cls.in_sigma1,
        sigma2_via_theta(pair, z, tol)?.is_some() == cls.in_sigma2,
        // Only the forward implication is claimed for σ^(3).
        sigma3_via_theta(pair, z, tol)?.is_none() || cls.in_sigma3,
    ])
}

fn trial(t: &mut Tally, pair: &CommutingPair, rng: &mut ChaCha8Rng, opts: &VerifyOptions) {
    let tol = &opts.tol;
    let n = pair.n();

    t.record("commutator", tol.residual_abs, pair.commutator_residual());
    t.record("defect_square_roots", 1e-10, defect_squares(pair));
    t.record("purity", 0.0, if pair.is_pure() && pair.defect_star_injective() { 0.0 } else { 1.0 });

    let z = random_ball_point(rng, 0.95);
    t.record_result("koszul_complex", 1e-12, koszul_maps(pair, &z, tol).map(|m| m.complex_residual()));

    let (x, y) = (random_vector(rng, n), random_vector(rng, n));
    let scale = 1.0 + fro(&pair.row());
    t.record_result("theta_defect_identity", 1e-9, theta_defect_residual(pair, &z, &x, &y, tol).map(|r| r / scale));
    t.record_result("theta_adjoint_identity", 1e-9, theta_adjoint_defect_residual(pair, &z, &x, tol));

    let spectrum = match taylor_spectrum(pair, tol) {
        Ok(s) => s,
        Err(_) => {
            t.record("spectrum", 0.0, 1.0);
            return;
        }
    };
    let points: Vec<BallPoint> = spectrum.points.iter().map(|p| p.point).collect();
    let on_ok = spectrum.classifications.iter().all(|c| c.in_sigma1 && c.in_sigma2 && c.in_sigma3);
    let off = random_point_away_from(rng, 0.95, &points, 1e-3);
    let off_ok = classify_point(pair, &off, tol).map(|c| !c.in_spectrum()).unwrap_or(false);
    t.record("spectrum", 0.0, if on_ok && off_ok && spectrum.total_multiplicity() == n { 0.0 } else { 1.0 });

    let auto = random_automorphism(rng);
    for w in points.iter().chain([&off]) {
        let agree = theta_criteria_agree(pair, w, tol).ok();
        t.record_agreement("theta_sigma1", agree.map(|a| a[0]));
        t.record_agreement("theta_sigma2", agree.map(|a| a[1]));
        t.record_agreement("theta_sigma3_forward", agree.map(|a| a[2]));
        t.record_agreement("transport_sigma1", map_sigma1_check(&auto, pair, w, tol).ok().map(|r| r.agrees()));
        t.record_agreement("transport_sigma2", map_sigma2_check(&auto, pair, w, tol).ok().map(|r| r.agrees()));
        t.record_agreement("transport_sigma3", map_sigma3_check(&auto, pair, w, tol).ok().map(|r| r.holds(tol)));
    }

    t.record_result("moved_defect_identities", 1e-8, defect_identity_residuals(&auto, pair, tol).map(|(a, b)| a.max(b)));

    let block = block_resolvent(&auto, pair, tol)
        .and_then(|b| direct_block_resolvent(&auto, pair, tol).map(|d| fro(&(b - d))));
    t.record_result("block_resolvent", 1e-10, block);

    let lam = auto.lambda_row(n);
    let d_lambda = psd_sqrt(&(ComplexMatrix::identity(2 * n, 2 * n) - lam.adjoint() * lam), tol)
        .map(|root| fro(&(root - auto.d_lambda(n))));
    t.record_result("d_lambda", 1e-10, d_lambda);

    let moved = match phi_tuple(&auto, pair, tol) {
        Ok(m) => m,
        Err(_) => {
            t.record("phi_tuple", 0.0, 1.0);
            return;
        }
    };
    let explicit = explicit_components(&auto, pair, tol).map(|(b1, b2)| fro(&(b1 - moved.a1())).max(fro(&(b2 - moved.a2()))));
    t.record_result("explicit_components", 1e-10, explicit);

    let back = phi_tuple(&auto, &moved, tol).map(|b| fro(&(b.a1() - pair.a1())).max(fro(&(b.a2() - pair.a2()))));
    t.record_result("involution_tuple", 1e-8, back);
    let point_back = phi_point(&auto, &z).and_then(|w| phi_point(&auto, &w)).map(|zz| zz.distance(&z));
    t.record_result("involution_point", 1e-12, point_back);

    let omegas = omega_pair(&auto, &with_fault(pair, opts.fault, tol), tol);
    match omegas {
        Ok(om) => {
            t.record("omega_unitary", 1e-8, unitarity_defect(&om.omega).max(unitarity_defect(&om.omega_star)));
            t.record_result("intertwining", 1e-7, intertwine_residual_with(&om, &auto, pair, &z, tol));
        }
        Err(_) => {
            t.record("omega_unitary", 1e-8, f64::INFINITY);
            t.record("intertwining", 1e-7, f64::INFINITY);
        }
    }

    let mapping = (|| {
        let image: Vec<BallPoint> = points.iter().map(|p| phi_point(&auto, p)).collect::<Result<_>>()?;
        let direct: Vec<BallPoint> = taylor_spectrum(&moved, tol)?.points.iter().map(|p| p.point).collect();
        Ok(hausdorff(&image, &direct))
    })();
    t.record_result("spectral_mapping", 1e-6, mapping);
}

/// Runs the suite; failures are reported in the result, never raised.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut tally = Tally(Vec::new());
    for _ in 0..opts.trials {
        let pair = gen_commuting_pure(opts.n, rng.random(), TRIAL_NORM);
        trial(&mut tally, &pair, &mut rng, opts);
    }
    VerifyReport {
        n: opts.n,
        trials: opts.trials,
        seed: opts.seed,
        properties: tally.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(n: usize, trials: usize, seed: u64) -> VerifyOptions {
        VerifyOptions {
            n,
            trials,
            seed,
            tol: Tolerance::default(),
            fault: None,
        }
    }

    #[test]
    fn suite_passes_and_repeats() {
        let a = run_verify(&opts(2, 5, 3));
        assert!(a.all_passed(), "{a}");
        assert_eq!(a.to_string(), run_verify(&opts(2, 5, 3)).to_string());
        assert!(a.properties.len() >= 20);
    }

    #[test]
    fn injected_fault_fails_intertwining_only() {
        let mut o = opts(3, 2, 11);
        o.fault = Some(Fault::CorruptIntertwining);
        let r = run_verify(&o);
        assert!(!r.get("intertwining").unwrap().passed());
        assert!(r.get("moved_defect_identities").unwrap().passed());
        assert!(r.to_string().contains("FAILED"));
    }

    #[test]
    fn sampled_points_respect_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            assert!(random_ball_point(&mut rng, 0.7).norm_sq() < 0.49);
        }
    }
}
