//! Command-line front end. Each command returns its output and exit code
//! instead of printing, so the binary stays a thin shell and tests can
//! drive commands in-process.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::koszul::{taylor_spectrum, TriangularizationMethod};
use crate::moebius::{phi_tuple, Automorphism};
use crate::numerics::Tolerance;
use crate::scan::{scan, to_csv, ScanSlice, SliceMode};
use crate::tuple::{build_pair, gen_commuting_pure, CommutingPair, TupleFile};
use crate::verify::{run_verify, Fault, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "taylor-joint", version, about = "Taylor joint spectra of commuting 2-contractions")]
pub struct Cli {
    /// Residual threshold for identities and Laplacian singularity.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Relative singular-value threshold for ranks and kernels.
    #[arg(long = "rank-tol", global = true, default_value_t = 1e-10)]
    pub rank_tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a tuple file holds a commuting 2-contraction.
    Validate { input: PathBuf },
    /// List the joint spectrum.
    Spectrum {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Classify a 2-D grid slice of the ball and emit CSV.
    Scan {
        input: PathBuf,
        /// re-re, fix-z2 or fix-z1.
        #[arg(long, default_value = "re-re")]
        mode: String,
        /// Value of the fixed coordinate in fix modes, as "a+bi".
        #[arg(long, default_value = "0")]
        fix: String,
        #[arg(long, default_value_t = 41)]
        res: usize,
        #[arg(long, default_value_t = ScanSlice::DEFAULT_RADIUS)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the ball automorphism Φλ to a pair.
    Transform {
        input: PathBuf,
        /// λ as "a+bi,c+di".
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite on generated pairs.
    Verify {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Negative control: corrupt the intertwining check.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Generate a random pure commuting pair.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        norm: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }

    fn from_error(e: &Error) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: exit_code(e),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => EXIT_INPUT,
        _ => EXIT_FAILURE,
    }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i` and `-i`, with decimal or
/// exponent-form floats.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number {text:?} (expected a+bi)"));
    let num = |t: &str| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(num(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => num(t)?,
    };
    Ok(Complex64::new(re, im))
}

pub fn parse_lambda(text: &str) -> Result<(Complex64, Complex64)> {
    match text.split(',').collect::<Vec<_>>().as_slice() {
        [a, b] => Ok((parse_complex(a)?, parse_complex(b)?)),
        _ => Err(Error::Parse(format!("lambda must be two complex numbers \"a+bi,c+di\", got {text:?}"))),
    }
}

fn format_complex(z: Complex64) -> String {
    let clean = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im < 0.0 {
        format!("{re:.6}-{:.6}i", -im)
    } else {
        format!("{re:.6}+{im:.6}i")
    }
}

pub fn load_tuple(path: &Path) -> Result<TupleFile> {
    TupleFile::parse(&fs::read_to_string(path)?)
}

pub fn load_pair(path: &Path, tol: &Tolerance) -> Result<CommutingPair> {
    let (a1, a2) = load_tuple(path)?.matrices()?;
    build_pair(a1, a2, tol)
}

fn write_or_print(out: Option<&Path>, text: &str, stdout: &mut String) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.push_str(text),
    }
    Ok(())
}

/// Key facts about a validated pair, one per line, plus a summary line.
fn pair_summary(pair: &CommutingPair) -> String {
    let mut s = String::new();
    writeln!(s, "n {}", pair.n()).unwrap();
    writeln!(s, "commutator_residual {:.3e}", pair.commutator_residual()).unwrap();
    writeln!(s, "purity_index {}", pair.purity_index()).unwrap();
    writeln!(s, "is_pure {}", pair.is_pure()).unwrap();
    writeln!(s, "defect_injective {}", pair.defect_injective()).unwrap();
    writeln!(s, "defect_star_injective {}", pair.defect_star_injective()).unwrap();
    let kind = if pair.is_pure() { "pure commuting 2-contraction" } else { "commuting 2-contraction (not pure)" };
    writeln!(s, "{kind}, purity_index {:.3}", pair.purity_index()).unwrap();
    s
}

fn purity_warning(pair: &CommutingPair) -> String {
    if pair.is_pure() {
        String::new()
    } else {
        "warning: A1A1* + A2A2* has norm 1; theta-based criteria and transforms need a pure pair\n".into()
    }
}

pub fn cmd_validate(input: &Path, tol: &Tolerance) -> Outcome {
    match load_pair(input, tol) {
        Ok(pair) => Outcome {
            stdout: pair_summary(&pair),
            stderr: purity_warning(&pair),
            code: EXIT_OK,
        },
        Err(e) => Outcome::from_error(&e),
    }
}

#[derive(Serialize)]
struct JsonPoint {
    z1: [f64; 2],
    z2: [f64; 2],
    multiplicity: usize,
    in_sigma1: bool,
    in_sigma2: bool,
    in_sigma3: bool,
    lap0_min: f64,
    lap1_min: f64,
    lap2_min: f64,
}

#[derive(Serialize)]
struct JsonSpectrum {
    method: String,
    total_multiplicity: usize,
    points: Vec<JsonPoint>,
}

fn method_name(m: TriangularizationMethod) -> String {
    match m {
        TriangularizationMethod::RandomCombination { attempt } => format!("random-combination (attempt {attempt})"),
        TriangularizationMethod::Staircase => "staircase".into(),
    }
}

pub fn cmd_spectrum(input: &Path, json: bool, tol: &Tolerance) -> Outcome {
    let result = load_pair(input, tol).and_then(|p| taylor_spectrum(&p, tol));
    let spectrum = match result {
        Ok(s) => s,
        Err(e) => return Outcome::from_error(&e),
    };
    if json {
        let doc = JsonSpectrum {
            method: method_name(spectrum.method),
            total_multiplicity: spectrum.total_multiplicity(),
            points: spectrum
                .points
                .iter()
                .zip(&spectrum.classifications)
                .map(|(p, c)| JsonPoint {
                    z1: [p.point.z1.re, p.point.z1.im],
                    z2: [p.point.z2.re, p.point.z2.im],
                    multiplicity: p.multiplicity,
                    in_sigma1: c.in_sigma1,
                    in_sigma2: c.in_sigma2,
                    in_sigma3: c.in_sigma3,
                    lap0_min: c.lap0_min,
                    lap1_min: c.lap1_min,
                    lap2_min: c.lap2_min,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("spectrum serializes");
        text.push('\n');
        return Outcome::ok(text);
    }
    let mut s = String::new();
    writeln!(s, "method {}", method_name(spectrum.method)).unwrap();
    for (p, c) in spectrum.points.iter().zip(&spectrum.classifications) {
        let b = |f: bool| u8::from(f);
        writeln!(
            s,
            "({}, {})  multiplicity {}  sigma1 {} sigma2 {} sigma3 {}",
            format_complex(p.point.z1),
            format_complex(p.point.z2),
            p.multiplicity,
            b(c.in_sigma1),
            b(c.in_sigma2),
            b(c.in_sigma3)
        )
        .unwrap();
    }
    Outcome::ok(s)
}

pub struct ScanArgs<'a> {
    pub mode: &'a str,
    pub fix: &'a str,
    pub res: usize,
    pub radius: f64,
    pub out: Option<&'a Path>,
}

pub fn cmd_scan(input: &Path, args: &ScanArgs<'_>, tol: &Tolerance) -> Outcome {
    let run = || -> Result<Outcome> {
        let mode: SliceMode = args.mode.parse()?;
        let slice = ScanSlice::new(mode, parse_complex(args.fix)?, args.res, args.radius)?;
        let pair = load_pair(input, tol)?;
        let records = scan(&pair, &slice, tol)?;
        let mut stdout = String::new();
        write_or_print(args.out, &to_csv(&records), &mut stdout)?;
        if let Some(p) = args.out {
            writeln!(stdout, "wrote {} rows to {}", records.len(), p.display()).unwrap();
        }
        Ok(Outcome::ok(stdout))
    };
    run().unwrap_or_else(|e| Outcome::from_error(&e))
}

pub fn cmd_transform(input: &Path, lambda: &str, out: Option<&Path>, tol: &Tolerance) -> Outcome {
    let run = || -> Result<Outcome> {
        let (l1, l2) = parse_lambda(lambda)?;
        let auto = Automorphism::new(l1, l2)?;
        let pair = load_pair(input, tol)?;
        let moved = phi_tuple(&auto, &pair, tol)?;
        let mut stdout = String::new();
        write_or_print(out, &TupleFile::from_pair(&moved).to_json(), &mut stdout)?;
        // The summary goes to stderr when stdout carries the tuple itself.
        let summary = pair_summary(&moved);
        let (stdout, stderr) = if out.is_some() { (summary, String::new()) } else { (stdout, summary) };
        Ok(Outcome {
            stdout,
            stderr,
            code: EXIT_OK,
        })
    };
    run().unwrap_or_else(|e| Outcome::from_error(&e))
}

pub fn cmd_verify(n: usize, trials: usize, seed: u64, inject_fault: bool, tol: &Tolerance) -> Outcome {
    if n < 2 || trials < 1 {
        return Outcome::from_error(&Error::Parse(format!("verify needs n ≥ 2 and trials ≥ 1 (got n={n}, trials={trials})")));
    }
    let report = run_verify(&VerifyOptions {
        n,
        trials,
        seed,
        tol: *tol,
        fault: inject_fault.then_some(Fault::CorruptIntertwining),
    });
    Outcome {
        stdout: report.to_string(),
        stderr: String::new(),
        code: if report.all_passed() { EXIT_OK } else { EXIT_FAILURE },
    }
}

pub fn cmd_gen(n: usize, seed: u64, norm: f64, out: Option<&Path>) -> Outcome {
    if n == 0 || !(norm > 0.0 && norm < 1.0) {
        return Outcome::from_error(&Error::Parse(format!("gen needs n ≥ 1 and 0 < norm < 1 (got n={n}, norm={norm})")));
    }
    let pair = gen_commuting_pure(n, seed, norm);
    let mut stdout = String::new();
    match write_or_print(out, &TupleFile::from_pair(&pair).to_json(), &mut stdout) {
        Ok(()) => {
            if let Some(p) = out {
                writeln!(stdout, "wrote {} (n={n}, seed={seed}, purity_index {})", p.display(), pair.purity_index()).unwrap();
            }
            Outcome::ok(stdout)
        }
        Err(e) => Outcome::from_error(&e),
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let tol = Tolerance {
        rank_rel: cli.rank_tol,
        residual_abs: cli.tol,
        ..Tolerance::default()
    };
    if let Err(e) = tol.validate() {
        return Outcome::from_error(&e);
    }
    match &cli.command {
        Command::Validate { input } => cmd_validate(input, &tol),
        Command::Spectrum { input, json } => cmd_spectrum(input, *json, &tol),
        Command::Scan {
            input,
            mode,
            fix,
            res,
            radius,
            out,
        } => cmd_scan(
            input,
            &ScanArgs {
                mode,
                fix,
                res: *res,
                radius: *radius,
                out: out.as_deref(),
            },
            &tol,
        ),
        Command::Transform { input, lambda, out } => cmd_transform(input, lambda, out.as_deref(), &tol),
        Command::Verify {
            n,
            trials,
            seed,
            inject_fault,
        } => cmd_verify(*n, *trials, *seed, *inject_fault, &tol),
        Command::Gen { n, seed, norm, out } => cmd_gen(*n, *seed, *norm, out.as_deref()),
    }
}

/// Parses arguments (including the program name) and runs the command.
/// Usage errors exit with code 2; `--help` and `--version` exit with 0.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_INPUT,
                }
            } else {
                Outcome::ok(text)
            }
        }
    }
}
