//! `epscalc`: evaluation, jets, funnels, Taylor jets, integrals, limits and
//! the verification suites from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error.

mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epscalc::expr::{parse, Expr};
use epscalc::geomfun::geometry;
use epscalc::integral::{integrate, ExprIntegrand};
use epscalc::meanvalue::{lhopital_00, lhopital_general, Form, Side};
use epscalc::suites::{self, SUITES};
use epscalc::taylor::verify_peano;
use epscalc::{Engine, Error};
use serde_json::{json, Value};

use render::{Format, Output};

#[derive(Parser)]
#[command(name = "epscalc", version, about = "Calculus with certified error functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Base point.
    #[arg(long, allow_negative_numbers = true)]
    at: Option<f64>,
    /// Tolerance for function values.
    #[arg(long, env = "EPSCALC_TOL", default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Subcommand)]
enum Cmd {
    /// Value of an expression.
    Eval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// Accepted for clarity; transcendental leaves are always geometric.
        #[arg(long)]
        geometric: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Value, slope and error envelope.
    Jet {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Nested tolerance boxes for the first-order remainder.
    Funnel {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, default_value_t = 10)]
        boxes: usize,
        /// Height of the outer box; defaults to the envelope bound at its radius.
        #[arg(long)]
        y0: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Taylor coefficients with a fitted remainder envelope.
    Taylor {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long)]
        order: usize,
        /// Also check the Peano form of the remainder.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Rigorous bracket for a definite integral.
    Integrate {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Limit of f/g with a certified error envelope.
    Lhopital {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
        #[arg(long, value_enum)]
        side: Option<SideArg>,
        /// Claimed limit; required unless both jets exist and vanish at the point.
        #[arg(long, allow_negative_numbers = true)]
        claim: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure of a command, with its exit code.
enum Fail {
    Usage(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

type Run = Result<Output, Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.cmd {
        Cmd::Eval { common, .. }
        | Cmd::Jet { common, .. }
        | Cmd::Funnel { common, .. }
        | Cmd::Taylor { common, .. }
        | Cmd::Integrate { common, .. }
        | Cmd::Lhopital { common, .. }
        | Cmd::Verify { common, .. } => common,
    };
    let result = if common.tol.is_finite() && common.tol > 0.0 && common.tol <= 1e-2 {
        run(&cli.cmd, common)
    } else {
        Err(Fail::Usage(format!("--tol must lie in (0, 0.01], got {}", common.tol)))
    };
    let out = match result {
        Ok(out) => out,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Fail::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::CertificationFailed { .. } => 1,
                _ => 2,
            });
        }
    };
    let text = out.render(common.format);
    let written = match &common.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(if out.pass { 0 } else { 1 })
}

fn at(common: &Common) -> Result<f64, Fail> {
    common.at.ok_or_else(|| Fail::Usage("--at is required".into()))
}

fn expr(src: &str) -> Result<Expr, Fail> {
    parse(src).map_err(|e| Fail::Usage(format!("in `{src}`: {e}")))
}

fn run(cmd: &Cmd, common: &Common) -> Run {
    let en = Engine::new(geometry(), common.tol);
    match cmd {
        Cmd::Eval { expr: src, .. } => {
            let (e, x) = (expr(src)?, at(common)?);
            let v = en.value(&e, x)?;
            Ok(Output::record(json!({ "x0": x, "value": v })))
        }
        Cmd::Jet { expr: src, .. } => {
            let (e, x) = (expr(src)?, at(common)?);
            Ok(Output::record(en.jet(&e, x)?.to_json()))
        }
        Cmd::Funnel { expr: src, boxes, y0, .. } => {
            let (e, x) = (expr(src)?, at(common)?);
            if let Some(y) = y0 {
                if !(y.is_finite() && *y > 0.0) {
                    return Err(Fail::Usage(format!("--y0 must be positive, got {y}")));
                }
            }
            let bs = en.funnel(&e, x, *boxes, *y0)?;
            Ok(Output::table(&["x_lo", "x_hi", "y_lo", "y_hi"], bs.iter().map(|b| b.to_json()).collect()))
        }
        Cmd::Taylor { expr: src, order, check, .. } => {
            let (e, x) = (expr(src)?, at(common)?);
            let tj = en.tjet(&e, x, *order)?;
            let mut v = tj.to_json();
            let mut pass = true;
            if *check {
                let noise = 64.0 * en.noise_floor(&e, x, 1.0)?;
                let fine = en.sampler();
                let verdict = verify_peano(&tj, |t| fine.value(&e, t), noise)?;
                pass = verdict.pass;
                v["peano"] = verdict.to_json();
            }
            Ok(Output::record(v).with_pass(pass))
        }
        Cmd::Integrate { expr: src, from, to, .. } => {
            let e = expr(src)?;
            let b = integrate(&ExprIntegrand::new(&en, &e), *from, *to, common.tol)?;
            Ok(Output::record(b.to_json()))
        }
        Cmd::Lhopital { f, g, side, claim, .. } => {
            let (fe, ge, x) = (expr(f)?, expr(g)?, at(common)?);
            let fine = en.sampler();
            let noise = fine.eval_noise(&fe, 1.0).max(fine.eval_noise(&ge, 1.0));
            let fv = |t: f64| fine.value(&fe, t);
            let gv = |t: f64| fine.value(&ge, t);
            let v = match claim {
                None => {
                    let jets = en.jet(&fe, x).and_then(|a| Ok((a, en.jet(&ge, x)?)));
                    let (fj, gj) = jets.map_err(|e| Fail::Usage(format!("{e}; pass --claim to test a limit from samples")))?;
                    let verdict = lhopital_00(&fj, &gj, fv, gv, noise).map_err(|e| match e {
                        Error::Precondition(m) => Fail::Usage(format!("{m}; pass --claim to test a limit from samples")),
                        e => Fail::Core(e),
                    })?;
                    let mut v = verdict.to_json();
                    v["form"] = json!("0/0");
                    (v, verdict.pass)
                }
                Some(l) => {
                    let side = match side {
                        Some(SideArg::Left) => Side::Left,
                        _ => Side::Right,
                    };
                    let (form, verdict) = lhopital_general(fv, gv, x, side, *l, 1.0, noise)?;
                    let mut v = verdict.to_json();
                    v["form"] = json!(match form {
                        Form::ZeroZero => "0/0",
                        Form::Unbounded => "*/inf",
                    });
                    v["side"] = json!(side.name());
                    (v, verdict.pass)
                }
            };
            Ok(Output::record(v.0).with_pass(v.1))
        }
        Cmd::Verify { suite, .. } => {
            let rep = suites::run(suite, common.tol)?;
            let rows: Vec<Value> = rep.records.iter().map(|r| r.to_json()).collect();
            Ok(Output::table(&["check", "grid_point", "lhs", "rhs", "residual", "pass"], rows).with_pass(rep.pass()))
        }
    }
}
