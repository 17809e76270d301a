//! `trigonal`: periods, sigma and al evaluation and identity checks for
//! cyclic trigonal curves y³ = (x−b₁)(x−b₂)(x−b₃)(x−b₄).
//!
//! Exit codes: 0 all checks pass, 1 an identity check failed, 2 bad input,
//! 3 numerical failure. The thread count follows `RAYON_NUM_THREADS`.

mod config;
mod doc;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use doc::{pair, to_toml, AlEvalDoc, CurvePeriods, Environment, PeriodsDoc, Report, SigmaEvalDoc};
use std::path::PathBuf;
use std::process::ExitCode;
use trigonal::al::{al_algebraic, al_sigma};
use trigonal::cx::{principal_cbrt, rel_diff, zeta};
use trigonal::divisor::{a_func, f_func};
use trigonal::periods::{PeriodData, V3};
use trigonal::sigma::{Deriv, DEFAULT_RADIUS};
use trigonal::verify::{run_suite, Corpus, Suite, VerifyOptions};
use trigonal::{CurveSpec, Error, Exec, SurfacePoint, C};

/// Relative quadrature tolerance used when no configuration is given.
const DEFAULT_PRECISION: f64 = 1e-13;

#[derive(Debug, Parser)]
#[command(name = "trigonal", version, about = "Abelian functions on cyclic trigonal curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Curve configuration (TOML); without it the three default curves are used.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "all")]
    suite: String,
    /// Random samples per check, overriding each check's default.
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 1, value_name = "S")]
    seed: u64,
    /// Theta truncation radius, overriding the configuration.
    #[arg(long, global = true, value_name = "R")]
    radius: Option<usize>,
    /// Write the document here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Period matrices, τ and the branch point vectors.
    Periods,
    /// Run a suite of identity checks and write the report.
    Verify,
    /// Print one line per check of a suite; the full report goes to --out.
    Report,
    /// Evaluate al_a^{(c)} from sigma and from the divisor functions.
    AlEval(AlArgs),
    /// Evaluate σ and its derivatives σ₁, σ₃, σ₃₃.
    SigmaEval(UArgs),
}

#[derive(Debug, Args)]
struct AlArgs {
    /// Branch point index, 1 to 4.
    #[arg(long)]
    a: usize,
    /// Twist index, 0 to 2.
    #[arg(long, default_value_t = 0)]
    c: usize,
    /// Divisor point as RE,IM[,SHEET] (three of them); SHEET k picks ζ^k times
    /// the principal cube root of f(x). A branch point can be given exactly.
    #[arg(long = "point", value_name = "RE,IM[,SHEET]", allow_hyphen_values = true)]
    points: Vec<String>,
    /// The argument u as three RE,IM pairs, instead of a divisor.
    #[arg(long = "u", value_name = "RE,IM", conflicts_with = "points", allow_hyphen_values = true)]
    u: Vec<String>,
}

#[derive(Debug, Args)]
struct UArgs {
    /// The argument u as three RE,IM pairs.
    #[arg(long = "u", value_name = "RE,IM", required = true, allow_hyphen_values = true)]
    u: Vec<String>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numeric() { 3 } else { 2 };
        Self { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

/// Errors that mean the argument was unusable rather than that the numerics failed.
fn argument_error(e: Error) -> Failure {
    match e {
        Error::OnThetaDivisor | Error::BranchPointInput => Failure { code: 2, message: e.to_string() },
        e => e.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

struct Setup {
    config: RunConfig,
    suite: Suite,
    radius: usize,
    precision: f64,
}

fn setup(c: &Common) -> Result<Setup, Failure> {
    let config = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default_corpus(),
    };
    let suite: Suite = c.suite.parse()?;
    if c.radius == Some(0) {
        return Err(input_error("--radius must be at least 1"));
    }
    if c.samples == Some(0) {
        return Err(input_error("--samples must be at least 1"));
    }
    let radius = c.radius.or(config.radius).unwrap_or(DEFAULT_RADIUS);
    let precision = config.precision.unwrap_or(DEFAULT_PRECISION);
    Ok(Setup { config, suite, radius, precision })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn corpus(s: &Setup, seed: u64, curves: &[CurveSpec]) -> Result<Corpus, Failure> {
    Ok(Corpus::build(curves, seed, Some(s.radius), Some(s.precision), Exec::Parallel)?)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let c = &cli.common;
    let s = setup(c)?;
    match &cli.command {
        Command::Periods => {
            let built: Vec<Result<PeriodData, Error>> = Exec::Parallel
                .map(&s.config.curves, |cu| PeriodData::build_with_tolerance(cu, Exec::Sequential, s.precision));
            let mut curve = Vec::new();
            for p in built {
                curve.push(CurvePeriods::new(&p?));
            }
            emit(&c.out, &to_toml(&PeriodsDoc { curve }))?;
            Ok(0)
        }
        Command::Verify | Command::Report => {
            let corpus = corpus(&s, c.seed, &s.config.curves)?;
            let opts = VerifyOptions { seed: c.seed, samples: c.samples, exec: Exec::Parallel };
            let checks = run_suite(&corpus, s.suite, &opts)?;
            let env = Environment {
                suite: s.suite.to_string(),
                seed: c.seed,
                samples: c.samples,
                theta_radius: s.radius,
                precision: s.precision,
                curves: s.config.curves.iter().map(doc::branch_points).collect(),
            };
            let report = Report::new(env, checks);
            if matches!(cli.command, Command::Report) {
                for r in &report.check {
                    println!("{r}");
                }
                println!("{} of {} checks pass", report.summary.passed, report.summary.total);
                if c.out.is_some() {
                    emit(&c.out, &to_toml(&report))?;
                }
            } else {
                emit(&c.out, &to_toml(&report))?;
            }
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Command::AlEval(args) => al_eval(&s, c, args),
        Command::SigmaEval(args) => sigma_eval(&s, c, args),
    }
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| input_error(format!("cannot parse {text:?}"))))
        .collect()
}

fn parse_u(items: &[String]) -> Result<V3, Failure> {
    if items.len() != 3 {
        return Err(input_error(format!("u needs 3 components, got {}", items.len())));
    }
    let mut u = V3::zeros();
    for (i, t) in items.iter().enumerate() {
        let v = parse_numbers(t)?;
        if v.len() != 2 || !v.iter().all(|x| x.is_finite()) {
            return Err(input_error(format!("component {t:?} is not RE,IM")));
        }
        u[i] = C::new(v[0], v[1]);
    }
    Ok(u)
}

fn parse_point(curve: &CurveSpec, text: &str) -> Result<SurfacePoint, Failure> {
    let v = parse_numbers(text)?;
    if !(v.len() == 2 || v.len() == 3) || !v.iter().all(|x| x.is_finite()) {
        return Err(input_error(format!("point {text:?} is not RE,IM[,SHEET]")));
    }
    let x = C::new(v[0], v[1]);
    if let Some(a) = (0..4).find(|&a| (curve.b[a] - x).norm() < 1e-12) {
        return Ok(curve.branch_point(a));
    }
    let sheet = v.get(2).copied().unwrap_or(0.0);
    if sheet.fract() != 0.0 {
        return Err(input_error(format!("sheet in {text:?} must be an integer")));
    }
    Ok(SurfacePoint::new(x, zeta(sheet as i64) * principal_cbrt(curve.f(x))))
}

fn first_curve(s: &Setup) -> &CurveSpec {
    &s.config.curves[0]
}

fn al_eval(s: &Setup, c: &Common, args: &AlArgs) -> Result<u8, Failure> {
    if !(1..=4).contains(&args.a) || args.c > 2 {
        return Err(input_error("need 1 ≤ a ≤ 4 and 0 ≤ c ≤ 2"));
    }
    let curve = first_curve(s).clone();
    let (a, tw) = (args.a - 1, args.c);
    let mut doc = AlEvalDoc { branch_points: doc::branch_points(&curve), a: args.a, c: args.c, ..Default::default() };
    let points = if args.u.is_empty() {
        if args.points.len() != 3 {
            return Err(input_error("give three --point values or three --u values"));
        }
        Some(args.points.iter().map(|t| parse_point(&curve, t)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    let ctx = corpus(s, c.seed, std::slice::from_ref(&curve))?.contexts.remove(0);
    let u = match &points {
        Some(pts) => {
            let (u, aps) = ctx.periods.abel_map(pts)?;
            doc.a_value = Some(pair(a_func(&curve, a, pts)?));
            doc.f_value = Some(pair(f_func(&curve, a, pts)));
            match al_algebraic(&curve, a, tw, &aps) {
                Ok(v) => {
                    doc.algebraic_route = Some(pair(v.value));
                    doc.algebraic_route_cubed = Some(pair(v.value.powi(3)));
                    doc.eps = Some(v.eps);
                }
                Err(Error::BranchDegeneracy) => {
                    doc.note = Some(format!("F vanishes: the divisor contains B{}, where A is zero", args.a));
                }
                Err(e) => return Err(e.into()),
            }
            u
        }
        None => parse_u(&args.u)?,
    };
    doc.u = doc::vector(&u);
    let v = al_sigma(&ctx, a, tw, &u).map_err(argument_error)?;
    doc.sigma_route = pair(v);
    doc.sigma_route_cubed = pair(v.powi(3));
    if let Some([re, im]) = doc.algebraic_route_cubed {
        doc.cube_relative_difference = Some(rel_diff(C::new(re, im), v.powi(3)));
    }
    emit(&c.out, &to_toml(&doc))?;
    Ok(0)
}

fn sigma_eval(s: &Setup, c: &Common, args: &UArgs) -> Result<u8, Failure> {
    let u = parse_u(&args.u)?;
    let curve = first_curve(s).clone();
    let ctx = corpus(s, c.seed, std::slice::from_ref(&curve))?.contexts.remove(0);
    let (v, scale) = ctx.sigma_with_scale(&u)?;
    let doc = SigmaEvalDoc {
        branch_points: doc::branch_points(&curve),
        u: doc::vector(&u),
        sigma: pair(v),
        sigma_1: pair(ctx.deriv(&u, Deriv::S1)?),
        sigma_3: pair(ctx.deriv(&u, Deriv::S3)?),
        sigma_33: pair(ctx.deriv(&u, Deriv::S33)?),
        relative_size: v.norm() / scale,
        delta1: ctx.delta().delta1.clone(),
        delta2: ctx.delta().delta2.clone(),
    };
    emit(&c.out, &to_toml(&doc))?;
    Ok(0)
}
