//! Acceptance criteria, one line per criterion. Runs as a plain binary so the
//! report is printed on success too; exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taylor_joint::charfn::{theta_defect_residual, theta_adjoint_defect_residual, sigma1_via_theta, sigma2_via_theta, sigma3_via_theta};
use taylor_joint::koszul::{classify_point, hausdorff, taylor_spectrum};
use taylor_joint::moebius::{
    block_resolvent, direct_block_resolvent, explicit_components, intertwine_residual_with, omega_pair,
    phi_point, phi_tuple, defect_identity_residuals, unitarity_defect,
};
use taylor_joint::numerics::{fro, psd_sqrt, spectral_norm, ComplexMatrix};
use taylor_joint::scan::CSV_HEADER;
use taylor_joint::tuple::fixtures::{self, build};
use taylor_joint::tuple::gen_commuting_pure;
use taylor_joint::verify::{random_automorphism, random_ball_point, random_point_away_from, random_vector};
use taylor_joint::{BallPoint, CommutingPair, Tolerance};

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Pair with a random dimension in `dims` and a random norm in [0.3, 0.95].
fn random_pair(rng: &mut ChaCha8Rng, dims: std::ops::RangeInclusive<usize>) -> CommutingPair {
    let n = rng.random_range(dims);
    let norm = rng.random_range(0.3..0.95);
    gen_commuting_pure(n, rng.random(), norm)
}

fn spectrum_points(pair: &CommutingPair) -> Vec<BallPoint> {
    taylor_spectrum(pair, &tol()).expect("spectrum").points.iter().map(|p| p.point).collect()
}

fn theta_identity_sweep(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let pair = random_pair(&mut rng, 2..=8);
        let z = random_ball_point(&mut rng, 0.99);
        let (x, y) = (random_vector(&mut rng, pair.n()), random_vector(&mut rng, pair.n()));
        let scale = 1.0 + spectral_norm(&pair.row());
        worst1 = worst1.max(theta_defect_residual(&pair, &z, &x, &y, &tol()).unwrap() / scale);
        worst2 = worst2.max(theta_adjoint_defect_residual(&pair, &z, &x, &tol()).unwrap());
    }
    (worst1, worst2)
}

fn criterion_1_2() -> [Line; 2] {
    let (w1, w2) = theta_identity_sweep(0x11);
    [
        Line {
            id: 1,
            title: "θ_A(z)D_A identity",
            pass: w1 <= 1e-9,
            detail: format!("max residual/(1+‖A‖) {w1:.3e} ≤ 1e-9 over 100 trials, n in 2..=8"),
        },
        Line {
            id: 2,
            title: "θ_A(z)*D_A* identity",
            pass: w2 <= 1e-9,
            detail: format!("max residual {w2:.3e} ≤ 1e-9 over 100 trials, n in 2..=8"),
        },
    ]
}

fn criterion_3() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x33);
    let (mut false_neg, mut false_pos, mut bad_mult, mut checked) = (0, 0, 0, 0);
    for n in 2..=4 {
        for _ in 0..25 {
            let pair = gen_commuting_pure(n, rng.random(), 0.9);
            let spec = taylor_spectrum(&pair, &tol()).unwrap();
            if spec.total_multiplicity() != n {
                bad_mult += 1;
            }
            let points: Vec<BallPoint> = spec.points.iter().map(|p| p.point).collect();
            for p in &points {
                let cls = classify_point(&pair, p, &tol()).unwrap();
                false_neg += usize::from(!(cls.in_sigma1 && cls.in_sigma2 && cls.in_sigma3));
                checked += 1;
            }
            for _ in 0..200 {
                let z = random_point_away_from(&mut rng, 0.999, &points, 1e-3);
                let cls = classify_point(&pair, &z, &tol()).unwrap();
                false_pos += usize::from(cls.in_spectrum());
                checked += 1;
            }
        }
    }
    Line {
        id: 3,
        title: "triangularization vs Koszul classification",
        pass: false_neg == 0 && false_pos == 0 && bad_mult == 0,
        detail: format!(
            "{checked} points, false negatives {false_neg}, false positives {false_pos}, multiplicity mismatches {bad_mult}"
        ),
    }
}

/// Fixtures plus ten random pairs, each with its spectrum and 20 random points.
fn theta_scope(seed: u64) -> Vec<(CommutingPair, Vec<BallPoint>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = vec![build(fixtures::diagonal()), build(fixtures::nilpotent()), build(fixtures::zero(2))];
    pairs.extend((0..10).map(|_| random_pair(&mut rng, 2..=5)));
    pairs
        .into_iter()
        .map(|pair| {
            let mut points = spectrum_points(&pair);
            points.push(BallPoint::origin());
            let spec = points.clone();
            points.extend((0..20).map(|_| random_point_away_from(&mut rng, 0.95, &spec, 1e-3)));
            (pair, points)
        })
        .collect()
}

fn criterion_4_5_6() -> [Line; 3] {
    let scope = theta_scope(0x44);
    let (mut m1, mut m2, mut fwd, mut converse, mut on3, mut total) = (0, 0, 0, 0, 0, 0);
    for (pair, points) in &scope {
        for z in points {
            let cls = classify_point(pair, z, &tol()).unwrap();
            m1 += usize::from(sigma1_via_theta(pair, z, &tol()).unwrap().is_some() != cls.in_sigma1);
            m2 += usize::from(sigma2_via_theta(pair, z, &tol()).unwrap().is_some() != cls.in_sigma2);
            let w3 = sigma3_via_theta(pair, z, &tol()).unwrap().is_some();
            fwd += usize::from(w3 && !cls.in_sigma3);
            if cls.in_sigma3 {
                on3 += 1;
                converse += usize::from(w3);
            }
            total += 1;
        }
    }
    let scope_note = format!("{total} points over 3 fixtures and 10 random pairs");
    [
        Line {
            id: 4,
            title: "σ^(1) witness via θ ⇔ Koszul flag",
            pass: m1 == 0,
            detail: format!("mismatches {m1}, {scope_note}"),
        },
        Line {
            id: 5,
            title: "σ^(2) witness via θ ⇔ Koszul flag",
            pass: m2 == 0,
            detail: format!("mismatches {m2}, {scope_note}"),
        },
        Line {
            id: 6,
            title: "σ^(3) witness via θ ⇒ Koszul flag",
            pass: fwd == 0,
            detail: format!(
                "counterexamples {fwd}, {scope_note}; converse (informational): witness found at {converse} of {on3} σ^(3) points"
            ),
        },
    ]
}

fn criterion_7() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x77);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let pair = random_pair(&mut rng, 2..=8);
        let auto = random_automorphism(&mut rng);
        let (a, b) = defect_identity_residuals(&auto, &pair, &tol()).unwrap();
        worst = worst.max(a).max(b);
    }
    Line {
        id: 7,
        title: "defect identities for Φλ(A)",
        pass: worst <= 1e-8,
        detail: format!("max residual {worst:.3e} ≤ 1e-8 over 50 (pair, λ)"),
    }
}

fn criterion_8() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x88);
    let (mut unit, mut unit_star, mut inter) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..25 {
        let pair = random_pair(&mut rng, 2..=8);
        let auto = random_automorphism(&mut rng);
        let z = random_ball_point(&mut rng, 0.99);
        let om = omega_pair(&auto, &pair, &tol()).unwrap();
        unit = unit.max(unitarity_defect(&om.omega));
        unit_star = unit_star.max(unitarity_defect(&om.omega_star));
        inter = inter.max(intertwine_residual_with(&om, &auto, &pair, &z, &tol()).unwrap());
    }
    Line {
        id: 8,
        title: "unitaries Ω, Ω* and intertwining",
        pass: unit <= 1e-8 && unit_star <= 1e-8 && inter <= 1e-7,
        detail: format!(
            "‖Ω*Ω − I‖ {unit:.3e}, ‖Ω*^*Ω* − I‖ {unit_star:.3e} (≤ 1e-8); intertwining {inter:.3e} (≤ 1e-7); 25 trials"
        ),
    }
}

fn criterion_9() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x99);
    let (mut block, mut dl, mut explicit) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let pair = random_pair(&mut rng, 2..=8);
        let auto = random_automorphism(&mut rng);
        let n = pair.n();
        let b = block_resolvent(&auto, &pair, &tol()).unwrap();
        let d = direct_block_resolvent(&auto, &pair, &tol()).unwrap();
        block = block.max(fro(&(b - d)));
        let lam = auto.lambda_row(n);
        let root = psd_sqrt(&(ComplexMatrix::identity(2 * n, 2 * n) - lam.adjoint() * lam), &tol()).unwrap();
        dl = dl.max(fro(&(root - auto.d_lambda(n))));
        let moved = phi_tuple(&auto, &pair, &tol()).unwrap();
        let (b1, b2) = explicit_components(&auto, &pair, &tol()).unwrap();
        explicit = explicit.max(fro(&(b1 - moved.a1()))).max(fro(&(b2 - moved.a2())));
    }
    Line {
        id: 9,
        title: "closed forms for (I − Λ*A)^{-1}, D_Λ and (B1, B2)",
        pass: block <= 1e-10 && dl <= 1e-10 && explicit <= 1e-10,
        detail: format!("block {block:.3e}, D_Λ {dl:.3e}, components {explicit:.3e} (all ≤ 1e-10); 50 trials"),
    }
}

fn criterion_10() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0xaa);
    let (mut point, mut tuple) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let auto = random_automorphism(&mut rng);
        let z = random_ball_point(&mut rng, 0.99);
        let back = phi_point(&auto, &phi_point(&auto, &z).unwrap()).unwrap();
        point = point.max(back.distance(&z));
        let pair = random_pair(&mut rng, 2..=8);
        let twice = phi_tuple(&auto, &phi_tuple(&auto, &pair, &tol()).unwrap(), &tol()).unwrap();
        tuple = tuple.max(fro(&(twice.a1() - pair.a1()))).max(fro(&(twice.a2() - pair.a2())));
    }
    Line {
        id: 10,
        title: "involutivity of Φλ on points and pairs",
        pass: point <= 1e-12 && tuple <= 1e-8,
        detail: format!("points {point:.3e} (≤ 1e-12), pairs {tuple:.3e} (≤ 1e-8); 100 trials"),
    }
}

fn criterion_11() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbb);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let pair = random_pair(&mut rng, 2..=8);
        let auto = random_automorphism(&mut rng);
        let image: Vec<BallPoint> = spectrum_points(&pair).iter().map(|p| phi_point(&auto, p).unwrap()).collect();
        let direct = spectrum_points(&phi_tuple(&auto, &pair, &tol()).unwrap());
        worst = worst.max(hausdorff(&image, &direct));
    }
    Line {
        id: 11,
        title: "spectral mapping σ(Φλ(A)) = Φλ(σ(A))",
        pass: worst <= 1e-6,
        detail: format!("max Hausdorff distance {worst:.3e} ≤ 1e-6 over 25 pairs"),
    }
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_taylor-joint"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// In-ball lattice points of a re-re slice, counted with integers only.
fn lattice_count(res: i64) -> usize {
    let m = res - 1;
    let mut count = 0;
    for i in 0..res {
        for j in 0..res {
            let (a, b) = (2 * i - m, 2 * j - m);
            count += usize::from(a * a + b * b < m * m);
        }
    }
    count
}

fn criterion_12() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (a, b) = (path("a.json"), path("b.json"));
    let gen = |out: &str| run_cli(&["gen", "--n", "3", "--seed", "1", "--norm", "0.9", "--out", out]).status.success();
    let gen_ok = gen(&a) && gen(&b) && std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();

    let verify = || run_cli(&["verify", "--n", "2", "--trials", "5", "--seed", "3"]);
    let (v1, v2) = (verify(), verify());
    let verify_ok = v1.status.success() && v1.stdout == v2.stdout;

    let mut scan_ok = true;
    for res in [11usize, 25] {
        let csv = path(&format!("scan{res}.csv"));
        let out = run_cli(&["scan", &a, "--mode", "re-re", "--res", &res.to_string(), "--out", &csv]);
        let text = std::fs::read_to_string(Path::new(&csv)).unwrap_or_default();
        let lines: Vec<&str> = text.split('\n').collect();
        scan_ok &= out.status.success()
            && lines.first() == Some(&CSV_HEADER)
            && text.ends_with('\n')
            && !text.contains('\r')
            && lines.len() - 2 == lattice_count(res as i64);
    }
    Line {
        id: 12,
        title: "CLI determinism and scan layout",
        pass: gen_ok && verify_ok && scan_ok,
        detail: format!("gen identical {gen_ok}, verify identical {verify_ok}, scan header and row counts {scan_ok}"),
    }
}

fn main() {
    let mut lines = Vec::new();
    lines.extend(criterion_1_2());
    lines.push(criterion_3());
    lines.extend(criterion_4_5_6());
    lines.push(criterion_7());
    lines.push(criterion_8());
    lines.push(criterion_9());
    lines.push(criterion_10());
    lines.push(criterion_11());
    lines.push(criterion_12());
    for l in &lines {
        println!("criterion {:>2} {}  {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.title, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
