//! Named verification suites behind `epscalc verify`.
//!
//! Every suite is deterministic and returns one [`CheckRecord`] per checked
//! relation. Reference values come from closed forms or from the `f64`
//! standard library, never from the geometric functions under test.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::sync::Arc;

use crate::envelope::{
    env_compose, env_dominates, env_scale_bounded, env_sum, funnel_boxes, one_sided_grid, ErrorEnvelope, Sampler,
};
use crate::error::{Error, Result};
use crate::expr::{parse, Engine, Expr, Func};
use crate::geomfun::{geometry, parallelogram_bound, CheckRecord, CurveId, Report};
use crate::integral::{check_ftc, ftc_jet_expr, integrate, ExprIntegrand};
use crate::jet::{check_uniqueness, Jet1};
use crate::meanvalue::{cmvt_witness, derivative_ratio_envelope, find_critical, lhopital_00, lhopital_general, mvt_witness, Form, Side};
use crate::taylor::verify_peano;

/// Suite names accepted by [`run`]; `all` runs every other one in order.
pub const SUITES: [&str; 9] = ["envelope", "rules", "trig", "hyperbolic", "exp", "meanvalue", "taylor", "ftc", "all"];

/// Expressions with an interval of valid base points each.
pub const CORPUS: [(&str, f64, f64); 25] = [
    ("x^2", -3.0, 3.0),
    ("x^3 - 2*x", -2.0, 2.0),
    ("10*x^3 - 9*x^2 + 8*x - 7", -2.0, 2.0),
    ("1/x", 0.5, 3.0),
    ("x^(1/2)", 0.5, 4.0),
    ("x^(-3/2)", 0.5, 3.0),
    ("sin(x)", -3.0, 3.0),
    ("cos(x)", -3.0, 3.0),
    ("sin(x^2)", -1.5, 1.5),
    ("exp(x)", -2.0, 2.0),
    ("exp(-x^2)", -2.0, 2.0),
    ("ln(x)", 0.5, 4.0),
    ("x*ln(x)", 0.5, 3.0),
    ("sinh(x)", -2.0, 2.0),
    ("cosh(x)", -2.0, 2.0),
    ("sin(x)*cos(x)", -2.0, 2.0),
    ("exp(sin(x))", -2.0, 2.0),
    ("ln(1 + x^2)", -2.0, 2.0),
    ("sqrt(1 + x^2)", -2.0, 2.0),
    ("x/(1 + x^2)", -2.0, 2.0),
    ("sin(x)/x", 0.5, 3.0),
    ("(x^2 + 1)^3", -1.5, 1.5),
    ("cosh(x)^2 - sinh(x)^2", -1.5, 1.5),
    ("exp(x)*cos(x)", -2.0, 2.0),
    ("ln(cosh(x))", -2.0, 2.0),
];

/// Run a named suite at function tolerance `tol`.
pub fn run(name: &str, tol: f64) -> Result<Report> {
    match name {
        "envelope" => envelope(),
        "rules" => rules(tol),
        "trig" => trig(tol),
        "hyperbolic" => hyperbolic(tol),
        "exp" => exp(tol),
        "meanvalue" => meanvalue(tol),
        "taylor" => taylor(tol),
        "ftc" => ftc(tol),
        "all" => {
            let mut rep = Report::default();
            for s in &SUITES[..SUITES.len() - 1] {
                rep.extend(run(s, tol)?);
            }
            Ok(rep)
        }
        _ => Err(Error::InvalidArgument(format!("unknown suite `{name}`; expected one of {}", SUITES.join(", ")))),
    }
}

/// Value of `e` from the standard library, as an independent oracle.
pub fn reference_value(e: &Expr, x: f64) -> f64 {
    match e {
        Expr::Const(c) => *c,
        Expr::Var => x,
        Expr::Neg(a) => -reference_value(a, x),
        Expr::Add(a, b) => reference_value(a, x) + reference_value(b, x),
        Expr::Sub(a, b) => reference_value(a, x) - reference_value(b, x),
        Expr::Mul(a, b) => reference_value(a, x) * reference_value(b, x),
        Expr::Div(a, b) => reference_value(a, x) / reference_value(b, x),
        Expr::Pow(a, q) => {
            let u = reference_value(a, x);
            if *q.denom() == 1 {
                u.powi(*q.numer() as i32)
            } else {
                u.powf(*q.numer() as f64 / *q.denom() as f64)
            }
        }
        Expr::Call(f, a) => {
            let u = reference_value(a, x);
            match f {
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Sinh => u.sinh(),
                Func::Cosh => u.cosh(),
                Func::Exp => u.exp(),
                Func::Ln => u.ln(),
                Func::Sqrt => u.sqrt(),
                Func::Abs => u.abs(),
            }
        }
    }
}

/// Central difference of the reference value with step `h`.
pub fn central_difference(e: &Expr, x: f64, h: f64) -> f64 {
    (reference_value(e, x + h) - reference_value(e, x - h)) / (2.0 * h)
}

fn engine(tol: f64) -> Engine<'static, f64> {
    Engine::new(geometry(), tol)
}

fn flag(check: impl Into<String>, grid_point: Vec<f64>, ok: bool) -> CheckRecord {
    let v = if ok { 1.0 } else { 0.0 };
    CheckRecord::equal(check, grid_point, v, 1.0, 0.0)
}

fn sampler(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Sampler<f64> {
    Arc::new(f)
}

fn envelope() -> Result<Report> {
    let mut rep = Report::default();
    let an = |c, p, r| ErrorEnvelope::analytic(c, p, r);

    let s = env_sum(&an(1.0, 2.0, 1.0)?, &an(1.0, 1.0, 1.0)?)?;
    rep.push(CheckRecord::equal("env_sum C", vec![], s.coeff(), 2.0, 0.0));
    rep.push(CheckRecord::equal("env_sum p", vec![], s.power(), 1.0, 0.0));
    rep.push(flag("|e^2 + e| <= 2|e|", vec![], s.certify(|e| e * e + e.abs(), 0.0)?.pass()));

    let k = env_scale_bounded(&an(1.0, 1.0, 1.0)?, 3.0)?;
    rep.push(CheckRecord::equal("env_scale_bounded C", vec![], k.coeff(), 3.0, 0.0));
    let z = env_scale_bounded(&an(2.0, 0.5, 0.25)?, 0.0)?;
    rep.push(flag("scaling by 0 annihilates", vec![], z.is_zero()));
    let cb = env_scale_bounded(&an(1.0, 1.0, 1.0)?, 1.5)?;
    rep.push(flag("|1.5 cos(1+e) E| under scaled bound", vec![], cb.certify(|e| 1.5 * (1.0 + e).cos() * e.abs(), 0.0)?.pass()));

    let c = env_compose(&an(1.0, 2.0, 1.0)?, &an(2.0, 1.0, 0.25)?)?;
    rep.push(CheckRecord::equal("env_compose C", vec![], c.coeff(), 4.0, 0.0));
    rep.push(CheckRecord::equal("env_compose p", vec![], c.power(), 2.0, 0.0));
    rep.push(flag("(2e)^2 under composed bound", vec![], c.certify(|e| (2.0 * e) * (2.0 * e), 0.0)?.pass()));

    rep.push(flag("e^2 dominated by |e|", vec![], env_dominates(&an(1.0, 1.0, 1.0)?, |e| e * e)?));
    rep.push(flag("|e|^0.5 not dominated by e^2", vec![], !env_dominates(&an(1.0, 2.0, 1.0)?, |e: f64| e.abs().sqrt())?));
    rep.push(flag("zero dominated by anything", vec![], env_dominates(&an(0.5, 3.0, 1.0)?, |_| 0.0)?));

    let sq = ErrorEnvelope::empirical(sampler(|e| e * e), 1.0)?.with_dominator(1.0, 2.0, 0.0)?;
    let boxes = funnel_boxes(&sq, 3, 0.25, 0.0)?;
    for (b, w) in boxes.iter().zip([0.5, 0.5f64.powf(1.5), 0.25]) {
        rep.push(CheckRecord::equal("funnel width of e^2", vec![b.y_hi], b.x_hi, w, 1e-12));
    }
    let sine = ErrorEnvelope::empirical(sampler(|e: f64| if e == 0.0 { 0.0 } else { (e.sin() - e) / e.abs() }), 1.0)?
        .with_dominator(1.0 / 6.0, 2.0, 1e-15)?;
    let boxes = funnel_boxes(&sine, 8, 1.0 / 6.0, 1e-15)?;
    let nested = boxes.windows(2).all(|w| w[0].contains(&w[1]) && w[1].x_hi < w[0].x_hi && w[1].y_hi < w[0].y_hi);
    rep.push(flag("(sin e - e)/|e| funnel nested", vec![], nested && boxes.len() == 8));
    Ok(rep)
}

fn rules(tol: f64) -> Result<Report> {
    let mut rep = Report::default();
    let en = engine(tol);
    let slope = |s: &str, x: f64| -> Result<Jet1<f64>> { en.jet(&parse(s)?, x) };

    let j = slope("x*x", 3.0)?;
    rep.push(CheckRecord::equal("x*x at 3 value", vec![3.0], j.value, 9.0, 0.0));
    rep.push(CheckRecord::equal("x*x at 3 slope", vec![3.0], j.slope, 6.0, 0.0));
    let m = Jet1::monomial(2, 3.0);
    rep.push(flag("x*x and x^2 slopes agree", vec![3.0], check_uniqueness(&j, &m, &one_sided_grid(1.0))?.pass));
    let j = slope("x^2*x^3", 2.0)?;
    rep.push(CheckRecord::equal("x^2 x^3 at 2 slope", vec![2.0], j.slope, 80.0, 1e-12));
    let j = slope("1/x", 2.0)?;
    rep.push(CheckRecord::equal("1/x at 2 slope", vec![2.0], j.slope, -0.25, 1e-15));
    let j = slope("x^2/x", 3.0)?;
    rep.push(CheckRecord::equal("x^2/x at 3 slope", vec![3.0], j.slope, 1.0, 1e-12));
    let j = slope("(x^2)^3", 2.0)?;
    rep.push(CheckRecord::equal("(x^2)^3 at 2 slope", vec![2.0], j.slope, 192.0, 1e-9));
    let inv = Jet1::inverse(&Jet1::monomial(2, 2.0))?;
    rep.push(CheckRecord::equal("inverse of x^2 at 4 slope", vec![4.0], inv.slope, 0.25, 0.0));
    let half = Jet1::rational_power(1, 2, 4.0)?;
    rep.push(CheckRecord::equal("x^(1/2) at 4 slope", vec![4.0], half.slope, 0.25, 1e-15));
    let a = Jet1::rational_power(-1, 1, 2.0)?;
    let b = Jet1::var(2.0).recip()?;
    rep.push(flag("x^-1 agrees with 1/x", vec![2.0], check_uniqueness(&a, &b, &one_sided_grid(1.0))?.pass));

    for (i, (s, lo, hi)) in CORPUS.iter().enumerate() {
        let e = parse(s)?;
        let x = lo + (hi - lo) * (0.3 + 0.4 * i as f64 / CORPUS.len() as f64);
        let j = en.jet(&e, x)?;
        let fd = central_difference(&e, x, 1e-6);
        rep.push(CheckRecord::equal(format!("slope of {s} vs central difference"), vec![x], j.slope, fd, 1e-6 * fd.abs().max(1.0)));
        let cert = en.check_jet(&e, &j)?;
        rep.push(flag(format!("jet contract of {s}"), vec![x], cert.pass()));
    }
    Ok(rep)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn deriv_grid() -> Vec<f64> {
    (1..=20).map(|k| 0.5f64.powi(k)).collect()
}

fn oracle(check: &str, a: f64, got: f64, want: f64) -> CheckRecord {
    CheckRecord::equal(check, vec![a], got, want, 1e-8 * want.abs().max(1.0))
}

fn trig(tol: f64) -> Result<Report> {
    let g = geometry();
    let mut rep = g.verify_table(tol)?;
    rep.extend(g.verify_identity(CurveId::Circle, &grid(-10.0 * PI, 10.0 * PI, 64), tol)?);
    for a in grid(-10.0 * PI, 10.0 * PI, 16) {
        let (c, s) = g.cos_sin(a, tol)?;
        rep.push(oracle("cos vs reference", a, c, a.cos()));
        rep.push(oracle("sin vs reference", a, s, a.sin()));
    }
    for a in grid(-2.0, 2.0, 4) {
        for b in grid(-1.5, 1.5, 4) {
            rep.extend(g.verify_summation(CurveId::Circle, a, b, tol)?);
        }
    }
    rep.extend(g.verify_deriv_zero_inequalities(CurveId::Circle, &deriv_grid())?);
    rep.extend(g.verify_matrix_invariance(CurveId::Circle, 0.7, tol)?);
    let r = FRAC_1_SQRT_2;
    let (c, s) = g.cos_sin(PI / 4.0, tol)?;
    rep.push(CheckRecord::equal("cos(pi/4) = 1/sqrt 2", vec![PI / 4.0], c, r, 1e-8));
    rep.push(CheckRecord::equal("sin(pi/4) = 1/sqrt 2", vec![PI / 4.0], s, r, 1e-8));
    Ok(rep)
}

fn hyperbolic(tol: f64) -> Result<Report> {
    let g = geometry();
    let mut rep = g.verify_identity(CurveId::Hyperbola, &grid(-20.0, 20.0, 64), tol)?;
    for a in grid(-20.0, 20.0, 16) {
        let (c, s) = g.cosh_sinh(a, tol)?;
        rep.push(oracle("cosh vs reference", a, c, a.cosh()));
        rep.push(oracle("sinh vs reference", a, s, a.sinh()));
    }
    for a in grid(-2.0, 2.0, 4) {
        for b in grid(-1.5, 1.5, 4) {
            rep.extend(g.verify_summation(CurveId::Hyperbola, a, b, tol)?);
        }
    }
    rep.extend(g.verify_deriv_zero_inequalities(CurveId::Hyperbola, &deriv_grid())?);
    rep.extend(g.verify_matrix_invariance(CurveId::Hyperbola, 0.7, tol)?);
    rep.extend(g.verify_extension_consistency(&grid(-1.0, 1.0, 9), 3, tol)?);
    let floor = 5.0 / 36.0;
    for x in [1.0, 2.0, 10.0, 1e3, 1e6] {
        let v = parallelogram_bound(x)?;
        rep.push(flag("parallelogram bound > 5/36", vec![x], v > floor));
    }
    let closed = 5.0 / (2.0 * 8f64.sqrt() + 3.0 * 3f64.sqrt()) / 3.0;
    rep.push(CheckRecord::equal("parallelogram bound at 1", vec![1.0], parallelogram_bound(1.0)?, closed, 1e-12));
    Ok(rep)
}

fn exp(tol: f64) -> Result<Report> {
    let g = geometry();
    let mut rep = g.verify_identity(CurveId::SkewHyperbola, &grid(-20.0, 20.0, 64), tol)?;
    for a in grid(-20.0, 20.0, 16) {
        rep.push(oracle("exp vs reference", a, g.exp(a, tol)?, a.exp()));
    }
    for x in [0.1, 0.5, 2.0, 10.0] {
        rep.push(oracle("ln vs reference", x, g.ln(x, tol)?, x.ln()));
    }
    rep.push(CheckRecord::equal("ln 2 bracket", vec![2.0], g.ln2().mid(), LN_2, g.ln2().width() + 1e-15));
    for a in grid(-2.0, 2.0, 4) {
        for b in grid(-1.5, 1.5, 4) {
            rep.extend(g.verify_summation(CurveId::SkewHyperbola, a, b, tol)?);
        }
    }
    rep.extend(g.verify_deriv_zero_inequalities(CurveId::SkewHyperbola, &deriv_grid())?);
    rep.extend(g.verify_matrix_invariance(CurveId::SkewHyperbola, 0.7, tol)?);
    rep.extend(g.verify_reflection_region(&[0.25, 1.0, 2.5], tol)?);
    Ok(rep)
}

fn meanvalue(tol: f64) -> Result<Report> {
    let mut rep = Report::default();
    let en = engine(tol);
    let fine = en.sampler();
    let g = geometry();
    let fun = |s: &str| -> Result<Expr> { parse(s) };

    let sin = fun("sin(x)")?;
    let w = find_critical(|x| fine.value(&sin, x), |x| en.jet(&sin, x), 0.0, 3.0, tol)?;
    let c = w.as_ref().map_or(f64::NAN, |w| w.c);
    rep.push(CheckRecord::equal("critical point of sin on [0, 3]", vec![0.0, 3.0], c, PI / 2.0, 1e-6));

    let cube = fun("x^3")?;
    let w = mvt_witness(|x| fine.value(&cube, x), |x| en.jet(&cube, x), 0.0, 2.0, tol)?;
    let c = w.as_ref().map_or(f64::NAN, |w| w.c);
    rep.push(CheckRecord::equal("mean value point of x^3 on [0, 2]", vec![0.0, 2.0], c, 2.0 / 3f64.sqrt(), 1e-6));

    let sq = fun("x^2")?;
    let w = cmvt_witness(
        |x| fine.value(&sq, x),
        |x| fine.value(&cube, x),
        |x| en.jet(&sq, x),
        |x| en.jet(&cube, x),
        1.0,
        2.0,
        tol,
    )?;
    let c = w.as_ref().map_or(f64::NAN, |w| w.c);
    rep.push(CheckRecord::equal("Cauchy point of x^2, x^3 on [1, 2]", vec![1.0, 2.0], c, 14.0 / 9.0, 1e-6));

    let noise = fine.eval_noise(&sin, 1.0);
    let v = lhopital_00(&en.jet(&sin, 0.0)?, &Jet1::var(0.0), |x| fine.value(&sin, x), |x| Ok(x), noise)?;
    rep.push(CheckRecord::equal("sin(x)/x -> 1", vec![0.0], v.limit, 1.0, 1e-12));
    rep.push(flag("sin(x)/x envelope certified", vec![0.0], v.pass));

    let ln = fun("ln(x)")?;
    let noise = fine.eval_noise(&ln, 30.0);
    let (form, v) = lhopital_general(|x| fine.value(&ln, x), |x| Ok(1.0 / x), 0.0, Side::Right, 0.0, 1.0, noise)?;
    rep.push(flag("x ln x as ln x / (1/x) is unbounded form", vec![0.0], form == Form::Unbounded));
    rep.push(flag("x ln x -> 0 certified", vec![0.0], v.pass));
    let d = derivative_ratio_envelope(|x| g.ln_jet(x, fine.tol()), |x| Jet1::var(x).recip(), 0.0, Side::Right, 0.0, 1.0, noise)?;
    rep.push(flag("derivative ratio of x ln x certified", vec![0.0], d.pass));
    rep.push(CheckRecord::equal("derivative ratio power", vec![0.0], d.env.power(), 1.0, 1e-2));
    rep.push(CheckRecord::equal("derivative ratio coefficient", vec![0.0], d.raw_c, 1.0, 0.1));
    Ok(rep)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn taylor(tol: f64) -> Result<Report> {
    let mut rep = Report::default();
    let en = engine(tol);
    let fine = en.sampler();
    let cases: [(&str, fn(usize) -> f64); 3] = [
        ("exp(x)", |k| 1.0 / factorial(k)),
        ("sin(x)", |k| if k % 2 == 0 { 0.0 } else { [1.0, -1.0][(k / 2) % 2] / factorial(k) }),
        ("cos(x)", |k| if k % 2 == 1 { 0.0 } else { [1.0, -1.0][(k / 2) % 2] / factorial(k) }),
    ];
    for (s, coeff) in cases {
        let e = parse(s)?;
        let tj = en.tjet(&e, 0.0, 5)?;
        for (k, c) in tj.coeffs.iter().enumerate() {
            rep.push(CheckRecord::equal(format!("{s} coefficient {k}"), vec![0.0], *c, coeff(k), 1e-10));
        }
        let noise = 64.0 * en.noise_floor(&e, 0.0, 1.0)?;
        let v = verify_peano(&tj, |x| fine.value(&e, x), noise)?;
        rep.push(flag(format!("Peano remainder of {s}"), vec![0.0], v.pass));
        if s == "exp(x)" {
            let mut bad = tj.clone();
            bad.coeffs[3] = 0.0;
            let v = verify_peano(&bad, |x| fine.value(&e, x), noise)?;
            rep.push(flag("wrong c3 is rejected", vec![0.0], !v.pass));
        }
    }
    Ok(rep)
}

fn ftc(tol: f64) -> Result<Report> {
    let mut rep = Report::default();
    let en = engine(tol);
    let recip = parse("1/x")?;
    let b = integrate(&ExprIntegrand::new(&en, &recip), 1.0, 2.0, tol)?;
    rep.push(flag("integral of 1/x over [1, 2] contains ln 2", vec![1.0, 2.0], b.contains(LN_2)));
    for (s, base, x1) in [("cos(x)", 0.0, 0.0), ("1/x", 1.0, 2.0), ("exp(x)", 0.0, 0.5), ("x^2", 0.0, 1.0)] {
        let e = parse(s)?;
        let j = ftc_jet_expr(&en, &e, base, x1)?;
        rep.push(CheckRecord::equal(format!("slope of integral of {s}"), vec![x1], j.slope, reference_value(&e, x1), 1e-8));
        let cert = check_ftc(&ExprIntegrand::new(&en, &e), &j, 0.5, tol)?;
        rep.push(flag(format!("FTC contract of {s}"), vec![x1], cert.pass()));
    }
    let g = geometry();
    let inv = ExprIntegrand::new(&en, &recip);
    for a in [0.25, 0.5, 1.0, 1.5] {
        let b = integrate(&inv, 1.0, g.exp(a, tol)?, tol)?;
        rep.push(CheckRecord::equal("integral of 1/t up to exp A", vec![a], b.mid(), a, b.width() + 1e-8));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(run("nope", 1e-9), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn reference_matches_std() {
        let e = parse("exp(sin(x))/x").unwrap();
        assert_eq!(reference_value(&e, 0.5), 0.5f64.sin().exp() / 0.5);
    }

    #[test]
    fn envelope_suite_passes() {
        let rep = run("envelope", 1e-9).unwrap();
        assert!(rep.pass(), "{:?}", rep.failures().collect::<Vec<_>>());
    }
}
