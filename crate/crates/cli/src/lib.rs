//! Command-line front end for `diskchain`.
//!
//! Exit codes: 0 success / certified / pass, 1 check failed / not certified,
//! 2 usage or parse error, 3 numeric failure or output I/O failure.

pub mod figure;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use diskchain::agler::{
    agler_lower_bound, default_dims, in_class, perturb_interior, quotient_upper_bound, random_class_member,
    witness_kl, DomainFunction, PerturbMode, SampleMode,
};
use diskchain::bohr::{
    banach_chain_check, format_rational, k2_certificate, k2_improve, matrix_to_f64, parse_rational, reference_d,
    ExactMatrix2, DEFAULT_K2_EST, RHO_GRID,
};
use diskchain::cdomain::{check_domain, contains, validate_domain};
use diskchain::numlin::{inverse, spectral_norm};
use diskchain::ratcalc::{gamma_point, lift_to_polydisk, RatFunFile};
use diskchain::realize::{
    defect_identity_residual, eval_realization_operator, eval_realization_scalar, gain_bound_check, sigma_demo,
    validate_colligation, OperatorArgument,
};
use diskchain::{CMatrix, Colligation, DomainSpec, Error, LaurentPoly, MatRatFun1, C64};

use figure::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Residual bound used by the realization and demo checks.
const RESIDUAL_TOL: f64 = 1e-8;
/// `‖F(M)‖` tolerance in `demo kl`.
const KL_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "diskchain", version, about = "Rational functions, realizations and Agler-norm bounds on intersections of disks")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Domain specifications.
    #[command(subcommand)]
    Domain(DomainCmd),
    /// Lift a rational function to the polydisk.
    Lift(LiftArgs),
    /// Agler-norm bounds and operator-class tests.
    #[command(subcommand)]
    Agler(AglerCmd),
    /// Contractive realizations.
    #[command(subcommand)]
    Realize(RealizeCmd),
    /// Bohr-radius certificates.
    #[command(subcommand)]
    Bohr(BohrCmd),
    /// Worked examples.
    #[command(subcommand)]
    Demo(DemoCmd),
}

#[derive(Debug, Subcommand)]
enum DomainCmd {
    /// Check ordering, radii and nonemptiness.
    Validate { spec: PathBuf },
    /// Write boundary arcs as SVG or CSV.
    Plot(PlotArgs),
    /// Print the scaled domain used for the upper bounds.
    Check {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigFormat {
    Svg,
    Csv,
}

#[derive(Debug, Args)]
struct PlotArgs {
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the output extension, else SVG.
    #[arg(long, value_enum)]
    format: Option<FigFormat>,
    /// Samples per component.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Plot the scaled domain instead of the domain.
    #[arg(long)]
    check: bool,
    /// Overlay the scaled domain (SVG only).
    #[arg(long, conflicts_with = "check")]
    overlay: bool,
}

#[derive(Debug, Args)]
struct LiftArgs {
    /// Rational function file.
    function: PathBuf,
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Interior points used to check `G∘γ = F`.
    #[arg(long, default_value_t = 200)]
    verify: usize,
}

#[derive(Debug, Subcommand)]
enum AglerCmd {
    /// Lower bound from class samples, boundary points and witnesses.
    Lower {
        function: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Comma-separated sample dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Upper bound from the torus sup of the polydisk lift.
    Upper {
        function: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Operator-class membership of a matrix.
    Class {
        matrix: PathBuf,
        #[arg(long)]
        domain: PathBuf,
    },
    /// Move a member into the strict interior of the class.
    Perturb {
        matrix: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_parser = parse_real)]
        eps: f64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Interior point for convex mode, `re` or `re,im`.
        #[arg(long, value_parser = parse_complex)]
        p: Option<Complex64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Convex,
    Multihole,
    Decentered,
}

#[derive(Debug, Subcommand)]
enum RealizeCmd {
    /// Evaluate at a point or at a matrix.
    Eval {
        colligation: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_parser = parse_complex, conflicts_with = "matrix")]
        z: Option<Complex64>,
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Gain bound and defect identity on a given or sampled class member.
    Verify {
        colligation: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the two-component difference system on the annulus.
    DemoSigma {
        colligation: PathBuf,
        #[arg(long, value_parser = parse_real)]
        outer: f64,
        #[arg(long, value_parser = parse_real)]
        inner: f64,
        /// Laurent input file; defaults to the constant 1.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = -8, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, default_value_t = 8, allow_hyphen_values = true)]
        hi: i64,
    },
}

#[derive(Debug, Args)]
struct MatrixChoice {
    /// Use the built-in reference matrix.
    #[arg(long = "reference-d", alias = "paper-D", conflicts_with = "d")]
    reference: bool,
    /// Entries `d11,d12,d21,d22`, each `p/q` or a decimal.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
}

#[derive(Debug, Subcommand)]
enum BohrCmd {
    /// Exact certificate `S > 1` at radius `rho`.
    CertifyK2 {
        #[command(flatten)]
        matrix: MatrixChoice,
        #[arg(long, default_value = "3177/10000")]
        rho: String,
        #[arg(long, default_value_t = 12)]
        deg: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a matrix certified at a smaller radius.
    ImproveK2 {
        #[command(flatten)]
        matrix: MatrixChoice,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value_t = 12)]
        deg: u32,
        #[arg(long, default_value_t = RHO_GRID)]
        grid: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral chain for a Laurent polynomial and a matrix.
    Chain {
        function: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_parser = parse_real)]
        rho: f64,
        #[arg(long, value_parser = parse_real)]
        outer: f64,
        #[arg(long, value_parser = parse_real)]
        inner: f64,
        #[arg(long, value_parser = parse_real, default_value_t = DEFAULT_K2_EST)]
        k2_est: f64,
    },
}

#[derive(Debug, Subcommand)]
enum DemoCmd {
    /// `z^k + z^{−l}` at the extremal matrix on `A_{1,r}`.
    Kl {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, value_parser = parse_real)]
        r: f64,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
    Output(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Lib(_) => EXIT_USAGE,
            CliError::Output(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Output(s) => f.write_str(s),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// What a subcommand produced: a verdict, a human summary and a JSON report.
struct Outcome {
    pass: bool,
    human: String,
    report: Value,
}

impl Outcome {
    fn new(pass: bool, human: impl Into<String>, report: Value) -> Self {
        Outcome { pass, human: human.into(), report }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.report).expect("reports serialize"));
            } else {
                println!("{}", out.human);
            }
            if out.pass {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<Outcome> {
    match cmd {
        Command::Domain(c) => domain(c),
        Command::Lift(a) => lift(a),
        Command::Agler(c) => agler(c),
        Command::Realize(c) => realize(c),
        Command::Bohr(c) => bohr(c),
        Command::Demo(c) => demo(c),
    }
}

// ---- parsing helpers

fn parse_real(s: &str) -> Result<f64, String> {
    parse_rational(s).map(|q| diskchain::bohr::rational_to_f64(&q)).map_err(|e| e.to_string())
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_real(re)?, parse_real(im)?)),
        None => Ok(Complex64::new(parse_real(s)?, 0.0)),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> CliResult<()> {
    write_file(path, &(serde_json::to_string_pretty(v).expect("serializable") + "\n"))
}

fn read_domain(path: &Path) -> CliResult<DomainSpec> {
    let spec: DomainSpec = read_json(path)?;
    validate_domain(&spec).map_err(|r| CliError::Lib(r.into()))?;
    Ok(spec)
}

/// Rational (`num`/`den`) or Laurent (`kmin`/`coeffs`) function file.
fn read_function(path: &Path) -> CliResult<DomainFunction> {
    let v: Value = read_json(path)?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("{}: {e}", path.display()));
    if v.get("kmin").is_some() {
        Ok(DomainFunction::Laurent(serde_json::from_value(v).map_err(bad)?))
    } else {
        let f: RatFunFile = serde_json::from_value(v).map_err(bad)?;
        Ok(DomainFunction::Rational(f.to_ratfun()?))
    }
}

fn read_laurent(path: &Path) -> CliResult<LaurentPoly> {
    read_json(path)
}

fn c2(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn ratfun_json(f: &MatRatFun1) -> Value {
    let poly = |p: &diskchain::Poly1| p.coeffs().iter().map(|&z| c2(z)).collect::<Vec<_>>();
    let num: Vec<Vec<_>> = f.num().iter().map(|row| row.iter().map(poly).collect()).collect();
    json!({ "num": num, "den": poly(f.den()) })
}

// ---- domain

fn domain(cmd: DomainCmd) -> CliResult<Outcome> {
    match cmd {
        DomainCmd::Validate { spec } => {
            let spec: DomainSpec = read_json(&spec)?;
            let issues: Vec<String> = match validate_domain(&spec) {
                Ok(()) => Vec::new(),
                Err(r) => r.issues.iter().map(|i| i.to_string()).collect(),
            };
            let nonempty = issues.is_empty() && figure::looks_nonempty(&spec);
            let pass = issues.is_empty() && nonempty;
            let mut human = format!("k = {} ({} disks, {} holes)", spec.k(), spec.k1(), spec.k2() - spec.k1());
            for i in &issues {
                human += &format!("\n  invalid: {i}");
            }
            if issues.is_empty() && !nonempty {
                human += "\n  no interior point found on a 256×256 lattice";
            }
            human += if pass { "\nvalid" } else { "\nNOT valid" };
            Ok(Outcome::new(pass, human, json!({ "valid": pass, "issues": issues, "nonempty": nonempty, "k": spec.k() })))
        }
        DomainCmd::Plot(a) => {
            let spec = read_domain(&a.spec)?;
            let format = match a.format {
                Some(FigFormat::Svg) => Format::Svg,
                Some(FigFormat::Csv) => Format::Csv,
                None if a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
                None => Format::Svg,
            };
            let checked = if a.check || a.overlay { Some(check_domain(&spec)?) } else { None };
            let target = if a.check { checked.as_ref().expect("computed") } else { &spec };
            let body = match format {
                Format::Csv => figure::to_csv(target, a.samples)?,
                Format::Svg => figure::to_svg(target, if a.overlay { checked.as_ref() } else { None }, a.samples)?,
            };
            write_file(&a.out, &body)?;
            let rows = body.lines().count().saturating_sub(1);
            let human = match format {
                Format::Csv => format!("wrote {} ({rows} samples)", a.out.display()),
                Format::Svg => format!("wrote {}", a.out.display()),
            };
            Ok(Outcome::new(true, human, json!({ "out": a.out, "format": format!("{format:?}").to_lowercase() })))
        }
        DomainCmd::Check { spec, out } => {
            let spec = read_domain(&spec)?;
            let checked = check_domain(&spec)?;
            if let Some(p) = &out {
                write_json(p, &checked)?;
            }
            let human = serde_json::to_string_pretty(&checked).expect("serializable");
            Ok(Outcome::new(true, human, serde_json::to_value(&checked).expect("serializable")))
        }
    }
}

// ---- lift

/// Up to `n` strict interior points on a lattice over the bounding disk.
fn interior_points(spec: &DomainSpec, n: usize) -> Vec<C64> {
    let Some((c, r)) = spec.bounding_disk() else { return Vec::new() };
    let mut out = Vec::new();
    let mut grid = 16;
    while out.len() < n && grid <= 1024 {
        out.clear();
        for iy in 0..grid {
            for ix in 0..grid {
                let z = c + C64::new(
                    -r + 2.0 * r * (ix as f64 + 0.37) / grid as f64,
                    -r + 2.0 * r * (iy as f64 + 0.61) / grid as f64,
                );
                if contains(spec, z, true) {
                    out.push(z);
                }
            }
        }
        grid *= 2;
    }
    let stride = (out.len() / n.max(1)).max(1);
    out.into_iter().step_by(stride).take(n).collect()
}

fn lift(a: LiftArgs) -> CliResult<Outcome> {
    let spec = read_domain(&a.domain)?;
    let f = read_function(&a.function)?.to_ratfun()?;
    let g = lift_to_polydisk(&f, &spec)?;
    let mut max_err: f64 = 0.0;
    for z in interior_points(&spec, a.verify) {
        let lhs = g.eval_point(&gamma_point(&spec, z))?;
        let rhs = f.eval(z)?;
        max_err = max_err.max(spectral_norm(&(&lhs - &rhs))?);
    }
    let parts: Vec<Value> = g
        .parts()
        .iter()
        .map(|(j, p)| {
            let mut v = ratfun_json(p);
            v["component"] = json!(j);
            v
        })
        .collect();
    let report = json!({ "k": g.k(), "parts": parts, "max_consistency_error": max_err });
    if let Some(p) = &a.out {
        write_json(p, &report)?;
    }
    let pass = max_err <= 1e-9 * (1.0 + f64::EPSILON);
    let human = format!(
        "lift on k = {} components, {} nonzero parts; max |G(γ(z)) − F(z)| = {max_err:.3e}",
        g.k(),
        parts.len()
    );
    Ok(Outcome::new(pass, human, report))
}

// ---- agler

fn agler(cmd: AglerCmd) -> CliResult<Outcome> {
    match cmd {
        AglerCmd::Lower { function, domain, samples, dims, seed } => {
            let spec = read_domain(&domain)?;
            let f = read_function(&function)?;
            let dims = dims.unwrap_or_else(|| default_dims(&f));
            let lb = agler_lower_bound(&f, &spec, samples, &dims, seed)?;
            let human = format!(
                "Agler-norm lower bound {:.12} (source: {:?}, witness dimension {}, boundary sup {:.12}, skipped {})",
                lb.bound,
                lb.source,
                lb.witness.rows(),
                lb.boundary_sup,
                lb.skipped
            );
            let report = json!({
                "bound": lb.bound, "source": lb.source, "witness": lb.witness,
                "boundary_sup": lb.boundary_sup, "skipped": lb.skipped,
            });
            Ok(Outcome::new(true, human, report))
        }
        AglerCmd::Upper { function, domain, grid } => {
            let spec = read_domain(&domain)?;
            let f = read_function(&function)?.to_ratfun()?;
            let ub = quotient_upper_bound(&f, &spec, grid)?;
            let argmax: Vec<[f64; 2]> = ub.argmax.iter().map(|&z| c2(z)).collect();
            let mut human = format!("upper bound {:.12} at torus point {argmax:?}", ub.bound);
            if ub.sup_norm_surrogate {
                human += "\n  note: k >= 3, the torus sup is a surrogate for the lift's Agler norm";
            }
            let report = json!({ "bound": ub.bound, "argmax": argmax, "sup_norm_surrogate": ub.sup_norm_surrogate });
            Ok(Outcome::new(true, human, report))
        }
        AglerCmd::Class { matrix, domain } => {
            let spec = read_domain(&domain)?;
            let t: CMatrix = read_json(&matrix)?;
            let rep = in_class(&spec, &t)?;
            let human = format!(
                "member: {}, strict: {}, pencil margin {:.3e}, γ-norms {:?}",
                rep.member, rep.strict_member, rep.pencil_margin, rep.gamma_norms
            );
            Ok(Outcome::new(rep.member, human, serde_json::to_value(&rep).expect("serializable")))
        }
        AglerCmd::Perturb { matrix, domain, eps, mode, p, out } => {
            let spec = read_domain(&domain)?;
            let t: CMatrix = read_json(&matrix)?;
            let mode = match mode {
                ModeArg::Convex => PerturbMode::Convex {
                    p: p.ok_or_else(|| CliError::Usage("convex mode needs --p".into()))?,
                },
                ModeArg::Multihole => PerturbMode::Multihole,
                ModeArg::Decentered => PerturbMode::Decentered,
            };
            let te = perturb_interior(&spec, &t, eps, mode)?;
            let rep = in_class(&spec, &te)?;
            let dist = spectral_norm(&(&te - &t))?;
            if let Some(p) = &out {
                write_json(p, &te)?;
            }
            let human = format!(
                "‖T_ε − T‖ = {dist:.3e}; strict member: {} (pencil margin {:.3e})",
                rep.strict_member, rep.pencil_margin
            );
            let report = json!({ "t_eps": te, "distance": dist, "class": rep });
            Ok(Outcome::new(rep.strict_member, human, report))
        }
    }
}

// ---- realize

fn realize(cmd: RealizeCmd) -> CliResult<Outcome> {
    match cmd {
        RealizeCmd::Eval { colligation, domain, z, matrix } => {
            let spec = read_domain(&domain)?;
            let c: Colligation = read_json(&colligation)?;
            let (value, in_domain) = match (z, matrix) {
                (Some(z), _) => {
                    let v = eval_realization_scalar(&c, &spec, z)?;
                    (v.value, v.in_domain)
                }
                (None, Some(m)) => {
                    let t = OperatorArgument::new(&spec, read_json(&m)?)?;
                    let inside = t.margin() >= 0.0;
                    (eval_realization_operator(&c, &spec, &t)?, inside)
                }
                (None, None) => return Err(CliError::Usage("give --z or --matrix".into())),
            };
            let norm = spectral_norm(&value)?;
            let mut human = format!("‖F‖ = {norm:.12}\n{}", serde_json::to_string(&value).expect("serializable"));
            if !in_domain {
                human += "\n  note: argument lies outside the closed domain";
            }
            Ok(Outcome::new(true, human, json!({ "value": value, "norm": norm, "in_domain": in_domain })))
        }
        RealizeCmd::Verify { colligation, domain, matrix, samples, dim, seed } => {
            let spec = read_domain(&domain)?;
            let c: Colligation = read_json(&colligation)?;
            let gain = validate_colligation(&c);
            let ts: Vec<CMatrix> = match matrix {
                Some(m) => vec![read_json(&m)?],
                None => (0..samples as u64)
                    .map(|i| Ok(random_class_member(&spec, dim, seed.wrapping_add(i), SampleMode::Normal)?.t))
                    .collect::<CliResult<_>>()?,
            };
            let (mut worst_lhs, mut worst_res, mut violations) = (0.0f64, 0.0f64, 0usize);
            for t in ts.iter() {
                let arg = OperatorArgument::new(&spec, t.clone())?;
                let g = gain_bound_check(&c, &spec, &arg)?;
                let r = defect_identity_residual(&c, &spec, &arg)?;
                worst_lhs = worst_lhs.max(g.lhs);
                worst_res = worst_res.max(r);
                violations += usize::from(!g.pass);
            }
            let pass = violations == 0 && worst_res <= RESIDUAL_TOL;
            let human = format!(
                "{} argument(s): max ‖F(T)‖ = {worst_lhs:.12} vs gain {:.12} ({violations} violations); \
                 max defect residual {worst_res:.3e}; contraction: {}",
                ts.len(),
                gain.gain,
                gain.is_contraction
            );
            let report = json!({
                "arguments": ts.len(), "max_lhs": worst_lhs, "gain": gain.gain, "is_contraction": gain.is_contraction,
                "violations": violations, "max_defect_residual": worst_res, "pass": pass,
            });
            Ok(Outcome::new(pass, human, report))
        }
        RealizeCmd::DemoSigma { colligation, outer, inner, input, lo, hi } => {
            let c: Colligation = read_json(&colligation)?;
            let u = match input {
                Some(p) => read_laurent(&p)?,
                None => LaurentPoly::monomial(C64::new(1.0, 0.0), 0),
            };
            let d = sigma_demo(&c, outer, inner, &u, (lo, hi))?;
            let pass = d.state_residual <= RESIDUAL_TOL && d.output_residual <= RESIDUAL_TOL;
            let human = format!(
                "output on [{lo}, {hi}] computed; state residual {:.3e}, output residual {:.3e}",
                d.state_residual, d.output_residual
            );
            Ok(Outcome::new(pass, human, serde_json::to_value(&d).expect("serializable")))
        }
    }
}

// ---- bohr

fn choose_matrix(m: &MatrixChoice) -> CliResult<ExactMatrix2> {
    match (&m.d, m.reference) {
        (Some(s), _) => {
            let e: Vec<_> = s.split(',').map(parse_rational).collect::<Result<_, _>>()?;
            if e.len() != 4 {
                return Err(CliError::Usage(format!("--d needs four entries, got {}", e.len())));
            }
            Ok([[e[0].clone(), e[1].clone()], [e[2].clone(), e[3].clone()]])
        }
        (None, true) => Ok(reference_d()),
        (None, false) => Err(CliError::Usage("give --reference-d or --d".into())),
    }
}

fn bohr(cmd: BohrCmd) -> CliResult<Outcome> {
    match cmd {
        BohrCmd::CertifyK2 { matrix, rho, deg, out } => {
            let d = choose_matrix(&matrix)?;
            let rho = parse_rational(&rho)?;
            let cert = k2_certificate(&d, &rho, deg)?;
            let report = cert.report();
            if let Some(p) = &out {
                write_json(p, &report)?;
            }
            let human = format!(
                "S = {:.15} at rho = {} with degree box {deg}: {}",
                diskchain::bohr::rational_to_f64(&cert.sum),
                format_rational(&rho),
                if cert.certified { "certified (S > 1 exactly)" } else { "NOT certified" }
            );
            Ok(Outcome::new(cert.certified, human, serde_json::to_value(&report).expect("serializable")))
        }
        BohrCmd::ImproveK2 { matrix, budget, deg, grid, out } => {
            let d = choose_matrix(&matrix)?;
            let res = k2_improve(matrix_to_f64(&d), budget, deg, grid)?;
            let report = res.certificate.report();
            if let Some(p) = &out {
                write_json(p, &report)?;
            }
            let seed_rho = res.seed_certificate.as_ref().map(|c| format_rational(&c.rho));
            let human = format!(
                "certified rho = {} after {} evaluations (seed: {}){}",
                report.rho,
                res.evaluations,
                seed_rho.as_deref().unwrap_or("none"),
                if res.improved { ", improved" } else { "" }
            );
            let json = json!({
                "certificate": report, "seed_rho": seed_rho, "improved": res.improved, "evaluations": res.evaluations,
            });
            Ok(Outcome::new(res.certificate.certified, human, json))
        }
        BohrCmd::Chain { function, matrix, rho, outer, inner, k2_est } => {
            let f = read_laurent(&function)?;
            let t: CMatrix = read_json(&matrix)?;
            let ch = banach_chain_check(&f, &t, rho, outer, inner, k2_est)?;
            let human = format!(
                "‖f(T)‖ = {:.12} ≤ {:.12} (norm series){}; pass: {}",
                ch.lhs,
                ch.middle,
                if ch.weights_apply { format!(" ≤ {:.12} (weighted norm)", ch.rhs) } else { String::new() },
                ch.pass
            );
            Ok(Outcome::new(ch.pass, human, serde_json::to_value(ch).expect("serializable")))
        }
    }
}

// ---- demo

fn demo(cmd: DemoCmd) -> CliResult<Outcome> {
    match cmd {
        DemoCmd::Kl { k, l, r } => {
            let w = witness_kl(k, l, r)?;
            let f = LaurentPoly::kl(k as u32, l as u32);
            let fm = f.eval_matrix(&w.m)?;
            let norm_m = spectral_norm(&w.m)?;
            let norm_inv = spectral_norm(&inverse(&w.m)?)?;
            let value = spectral_norm(&fm)?;
            let predicted = 1.0 + r.powi(-(l as i32));
            let pass = (value - predicted).abs() <= KL_TOL * predicted.max(1.0);
            let human = format!(
                "‖M‖ = {norm_m:.12}, ‖M⁻¹‖ = {norm_inv:.12} (1/r = {:.12})\n‖F(M)‖ = {value:.12}\npredicted 1 + r^-l = {predicted:.12}",
                1.0 / r
            );
            let report = json!({
                "k": k, "l": l, "r": r, "norm_m": norm_m, "norm_m_inv": norm_inv,
                "norm_f_m": value, "predicted": predicted, "entries": w.predicted, "pass": pass,
            });
            Ok(Outcome::new(pass, human, report))
        }
    }
}
