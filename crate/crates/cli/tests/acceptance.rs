//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::Command;
use std::time::{Duration, Instant};

use epscalc::envelope::{env_compose, env_scale_bounded, env_sum, one_sided_grid, ErrorEnvelope};
use epscalc::expr::{parse, Engine, Expr, Func};
use epscalc::geomfun::{geometry, parallelogram_bound, CurveId};
use epscalc::integral::{check_ftc, ftc_jet_expr, integrate, ExprIntegrand};
use epscalc::jet::{check_uniqueness, Jet1};
use epscalc::meanvalue::{derivative_ratio_envelope, lhopital_00, lhopital_general, Form, Side};
use epscalc::suites::CORPUS;
use epscalc::taylor::verify_peano;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

const TOL: f64 = 1e-9;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn engine() -> Engine<'static, f64> {
    Engine::new(geometry(), TOL)
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_epscalc")).args(args).env_remove("EPSCALC_TOL").output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned(), String::from_utf8_lossy(&out.stderr).into_owned())
}

/// Standard-library value of an expression; the oracle for slopes.
fn std_value(e: &Expr, x: f64) -> f64 {
    match e {
        Expr::Const(c) => *c,
        Expr::Var => x,
        Expr::Neg(a) => -std_value(a, x),
        Expr::Add(a, b) => std_value(a, x) + std_value(b, x),
        Expr::Sub(a, b) => std_value(a, x) - std_value(b, x),
        Expr::Mul(a, b) => std_value(a, x) * std_value(b, x),
        Expr::Div(a, b) => std_value(a, x) / std_value(b, x),
        Expr::Pow(a, q) => std_value(a, x).powf(*q.numer() as f64 / *q.denom() as f64),
        Expr::Call(f, a) => {
            let u = std_value(a, x);
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

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn c1_trig_table() -> Outcome {
    let t = Instant::now();
    let (code, out, err) = cli(&["verify", "trig", "--format", "json"]);
    let took = t.elapsed();
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let rows: Vec<Value> = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let r = FRAC_1_SQRT_2;
    let table = [(0.0, 1.0, 0.0), (0.25, r, r), (0.5, 0.0, 1.0), (0.75, -r, r), (1.0, -1.0, 0.0)];
    for (frac, c, s) in table {
        for (name, want) in [("cos", c), ("sin", s)] {
            let check = format!("{name}({frac} pi)");
            let row = rows.iter().find(|v| v["check"] == check.as_str()).ok_or(format!("missing row {check}"))?;
            let got = row["lhs"].as_f64().ok_or("lhs not a number")?;
            ensure((got - want).abs() <= 1e-8, || format!("{check} = {got}, want {want}"))?;
        }
    }
    let identity = rows.iter().filter(|v| v["check"] == "cos^2 + sin^2 = 1").count();
    ensure(identity >= 16, || format!("only {identity} identity rows"))?;
    ensure(rows.iter().all(|v| v["pass"] == true), || "a trig check failed".into())?;
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!("{} rows, {identity} identity points, {took:.2?}", rows.len()))
}

fn c2_oracle_agreement() -> Outcome {
    let t = Instant::now();
    let g = geometry();
    let mut worst: f64 = 0.0;
    let mut check = |name: &str, a: f64, got: f64, want: f64| -> Result<(), String> {
        let err = (got - want).abs() / want.abs().max(1.0);
        worst = worst.max(err);
        ensure(err <= 1e-8, || format!("{name}({a}) = {got}, reference {want}"))
    };
    for a in grid(-PI, PI, 64).into_iter().chain(grid(-10.0 * PI, 10.0 * PI, 64)) {
        let (c, s) = g.cos_sin(a, TOL).map_err(|e| e.to_string())?;
        check("cos", a, c, a.cos())?;
        check("sin", a, s, a.sin())?;
    }
    for a in grid(-1.0, 1.0, 64).into_iter().chain(grid(-20.0, 20.0, 64)) {
        let (c, s) = g.cosh_sinh(a, TOL).map_err(|e| e.to_string())?;
        check("cosh", a, c, a.cosh())?;
        check("sinh", a, s, a.sinh())?;
        check("exp", a, g.exp(a, TOL).map_err(|e| e.to_string())?, a.exp())?;
    }
    let took = t.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!("worst relative error {worst:.2e}, {took:.2?}"))
}

fn c3_summation() -> Outcome {
    let g = geometry();
    let mut worst: f64 = 0.0;
    for curve in CurveId::ALL {
        for a in grid(-2.0, 2.0, 16) {
            for b in grid(-1.5, 1.5, 16) {
                let rep = g.verify_summation(curve, a, b, TOL).map_err(|e| e.to_string())?;
                let r = rep.max_residual();
                worst = worst.max(r);
                ensure(r <= 1e-7, || format!("{} at ({a}, {b}): residual {r}", curve.name()))?;
            }
        }
    }
    Ok(format!("3 curves x 256 points, worst residual {worst:.2e}"))
}

fn c4_derivative_at_zero() -> Outcome {
    let g = geometry();
    let pts: Vec<f64> = (1..=20).map(|k| 0.5f64.powi(k)).collect();
    for curve in CurveId::ALL {
        let rep = g.verify_deriv_zero_inequalities(curve, &pts).map_err(|e| e.to_string())?;
        ensure(rep.pass(), || format!("{}: {:?}", curve.name(), rep.failures().next()))?;
    }
    // E(A) from the function values, shrinking along the grid
    let tiny = |a: f64| (a * a * 1e-3).max(1e-15).min(1e-9);
    let mut last = [f64::INFINITY; 3];
    for &a in &pts {
        let (_, s) = g.cos_sin(a, tiny(a)).map_err(|e| e.to_string())?;
        let (_, sh) = g.cosh_sinh(a, tiny(a)).map_err(|e| e.to_string())?;
        let ex = g.exp(a, tiny(a)).map_err(|e| e.to_string())?;
        let es = [(s - a) / a, (sh - a) / a, (ex - 1.0 - a) / a].map(f64::abs);
        for (k, e) in es.iter().enumerate() {
            ensure(*e <= last[k] * (1.0 + 1e-6) + 1e-15, || format!("E not shrinking at {a} for curve {k}: {e} > {}", last[k]))?;
        }
        last = es;
    }
    ensure(last.iter().all(|e| *e < 1e-5), || format!("E(2^-20) = {last:?}"))?;
    Ok(format!("3 chains at 20 points; E(2^-20) = {:.1e} / {:.1e} / {:.1e}", last[0], last[1], last[2]))
}

fn c5_parallelogram() -> Outcome {
    for x in [1.0, 2.0, 10.0, 1e3, 1e6] {
        let v = parallelogram_bound(x).map_err(|e| e.to_string())?;
        ensure(v > 5.0 / 36.0, || format!("bound at {x} is {v}"))?;
    }
    let v = parallelogram_bound(1.0).map_err(|e| e.to_string())?;
    let closed = 5.0 / (2.0 * 8f64.sqrt() + 3.0 * 3f64.sqrt()) / 3.0;
    ensure((v - closed).abs() <= 1e-12, || format!("{v} vs {closed}"))?;
    Ok(format!("bound(1) = {v}"))
}

fn c6_slopes() -> Outcome {
    let en = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for (src, lo, hi) in CORPUS {
        let e = parse(src).map_err(|e| e.to_string())?;
        // same function by another rule path: (2f + x − x)/2
        let alt = Expr::div(Expr::sub(Expr::add(Expr::mul(Expr::Const(2.0), e.clone()), Expr::Var), Expr::Var), Expr::Const(2.0));
        for _ in 0..8 {
            let x = rng.gen_range(lo..hi);
            let j = en.jet(&e, x).map_err(|err| format!("{src} at {x}: {err}"))?;
            let h = 1e-6;
            let fd = (std_value(&e, x + h) - std_value(&e, x - h)) / (2.0 * h);
            let rel = (j.slope - fd).abs() / fd.abs().max(1.0);
            worst = worst.max(rel);
            ensure(rel <= 1e-6, || format!("{src} at {x}: slope {} vs {fd}", j.slope))?;
            let k = en.jet(&alt, x).map_err(|err| format!("{alt} at {x}: {err}"))?;
            let eps = one_sided_grid(j.env.radius().min(k.env.radius()));
            let u = check_uniqueness(&j, &k, &eps).map_err(|e| e.to_string())?;
            ensure(u.pass, || format!("{src} at {x}: slopes {} and {} differ", j.slope, k.slope))?;
        }
    }
    Ok(format!("25 expressions x 8 points, worst relative gap {worst:.2e}"))
}

fn c7_closure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for i in 0..1000 {
        let env = |rng: &mut ChaCha8Rng| {
            ErrorEnvelope::analytic(rng.gen_range(0.0..3.0), rng.gen_range(0.25..3.0), rng.gen_range(0.05..=1.0)).expect("valid")
        };
        let (a, b) = (env(&mut rng), env(&mut rng));
        let (ca, pa, cb, pb) = (a.coeff(), a.power(), b.coeff(), b.power());
        let ok = match i % 3 {
            0 => {
                let s = env_sum(&a, &b).map_err(|e| e.to_string())?;
                s.certify(|e: f64| ca * e.abs().powf(pa) + cb * e.abs().powf(pb), 0.0)
            }
            1 => {
                let m = rng.gen_range(0.0..5.0);
                let phase = rng.gen_range(0.0..6.0);
                let s = env_scale_bounded(&a, m).map_err(|e| e.to_string())?;
                s.certify(|e: f64| m * (phase + e).cos() * ca * e.abs().powf(pa), 0.0)
            }
            _ => {
                let s = env_compose(&a, &b).map_err(|e| e.to_string())?;
                s.certify(|e: f64| ca * (cb * e.abs().powf(pb)).powf(pa), 0.0)
            }
        }
        .map_err(|e| e.to_string())?;
        if !ok.pass() {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("1000 sum/scale/compose cases, 0 violations".into())
}

fn c8_lhopital() -> Outcome {
    let en = engine();
    let fine = en.sampler();
    let g = geometry();
    let sin = parse("sin(x)").map_err(|e| e.to_string())?;
    let fj = en.jet(&sin, 0.0).map_err(|e| e.to_string())?;
    let noise = fine.eval_noise(&sin, 1.0);
    let v = lhopital_00(&fj, &Jet1::var(0.0), |x| fine.value(&sin, x), |x| Ok(x), noise).map_err(|e| e.to_string())?;
    ensure(v.pass && (v.limit - 1.0).abs() < 1e-12, || format!("sin(x)/x: {v:?}"))?;
    let ln = parse("ln(x)").map_err(|e| e.to_string())?;
    let noise = fine.eval_noise(&ln, 30.0);
    let (form, w) = lhopital_general(|x| fine.value(&ln, x), |x| Ok(1.0 / x), 0.0, Side::Right, 0.0, 1.0, noise).map_err(|e| e.to_string())?;
    ensure(form == Form::Unbounded && w.pass, || format!("x ln x: {form:?} {w:?}"))?;
    let d = derivative_ratio_envelope(|x| g.ln_jet(x, fine.tol()), |x| Jet1::var(x).recip(), 0.0, Side::Right, 0.0, 1.0, noise)
        .map_err(|e| e.to_string())?;
    ensure(d.pass, || format!("derivative ratio not certified: {d:?}"))?;
    ensure((d.env.power() - 1.0).abs() <= 1e-2, || format!("fitted p = {}", d.env.power()))?;
    ensure((d.raw_c - 1.0).abs() <= 0.1, || format!("fitted C = {}", d.raw_c))?;
    Ok(format!("sin(x)/x -> {}, x ln x -> 0; ratio fit C = {:.4}, p = {:.4}", v.limit, d.raw_c, d.env.power()))
}

fn c9_taylor() -> Outcome {
    let en = engine();
    let fine = en.sampler();
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let refs: [(&str, Box<dyn Fn(usize) -> f64>); 3] = [
        ("exp(x)", Box::new(move |k| 1.0 / fact(k))),
        ("sin(x)", Box::new(move |k| if k % 2 == 0 { 0.0 } else if k % 4 == 1 { 1.0 / fact(k) } else { -1.0 / fact(k) })),
        ("cos(x)", Box::new(move |k| if k % 2 == 1 { 0.0 } else if k % 4 == 0 { 1.0 / fact(k) } else { -1.0 / fact(k) })),
    ];
    for (src, coeff) in &refs {
        let e = parse(src).map_err(|e| e.to_string())?;
        let tj = en.tjet(&e, 0.0, 5).map_err(|e| format!("{src}: {e}"))?;
        for (k, c) in tj.coeffs.iter().enumerate() {
            ensure((c - coeff(k)).abs() <= 1e-10, || format!("{src} c{k} = {c}, want {}", coeff(k)))?;
        }
        let noise = 64.0 * en.noise_floor(&e, 0.0, 1.0).map_err(|e| e.to_string())?;
        let v = verify_peano(&tj, |x| fine.value(&e, x), noise).map_err(|e| e.to_string())?;
        ensure(v.pass, || format!("Peano check of {src} failed: {v:?}"))?;
        let mut bad = tj.clone();
        bad.coeffs[3] += 0.05;
        let v = verify_peano(&bad, |x| fine.value(&e, x), noise).map_err(|e| e.to_string())?;
        ensure(!v.pass, || format!("wrong c3 for {src} accepted: {v:?}"))?;
    }
    Ok("exp, sin, cos to order 5; wrong c3 rejected".into())
}

fn c10_ftc() -> Outcome {
    let en = engine();
    for (src, lo, hi) in CORPUS {
        let e = parse(src).map_err(|e| e.to_string())?;
        let x1 = 0.5 * (lo + hi);
        let j = ftc_jet_expr(&en, &e, x1, x1).map_err(|err| format!("{src}: {err}"))?;
        let span = (0.25 * (hi - lo)).min(0.5);
        let cert = check_ftc(&ExprIntegrand::new(&en, &e), &j, span, TOL).map_err(|err| format!("{src}: {err}"))?;
        ensure(cert.pass(), || format!("FTC contract of {src} failed: {:?}", cert.witness))?;
    }
    let g = geometry();
    let recip = parse("1/x").map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for a in [0.25, 0.5, 1.0, 1.5] {
        let top = g.exp(a, TOL).map_err(|e| e.to_string())?;
        let b = integrate(&ExprIntegrand::new(&en, &recip), 1.0, top, TOL).map_err(|e| e.to_string())?;
        let miss = (b.mid() - a).abs();
        worst = worst.max(miss);
        ensure(miss <= b.width() + 1e-8, || format!("A = {a}: bracket [{}, {}]", b.lo, b.hi))?;
    }
    Ok(format!("25 FTC contracts; round trip within {worst:.1e}"))
}

fn c11_funnel() -> Outcome {
    let (code, out, err) = cli(&["funnel", "sin(x)-x", "--at", "0", "--format", "json"]);
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let boxes = v.as_array().ok_or("not an array")?;
    ensure(boxes.len() >= 8, || format!("{} boxes", boxes.len()))?;
    let mut prev: Option<[f64; 4]> = None;
    for b in boxes {
        let o = b.as_object().ok_or("box is not an object")?;
        let keys: Vec<&str> = o.keys().map(String::as_str).collect();
        ensure(keys == ["x_hi", "x_lo", "y_hi", "y_lo"], || format!("keys {keys:?}"))?;
        let get = |k: &str| o[k].as_f64().ok_or(format!("{k} not a number"));
        let cur = [get("x_lo")?, get("x_hi")?, get("y_lo")?, get("y_hi")?];
        ensure(cur[0] < 0.0 && cur[1] > 0.0 && cur[2] < 0.0 && cur[3] > 0.0, || format!("degenerate box {cur:?}"))?;
        if let Some(p) = prev {
            let nested = p[0] < cur[0] && cur[1] < p[1] && p[2] < cur[2] && cur[3] < p[3];
            ensure(nested, || format!("{cur:?} not strictly inside {p:?}"))?;
        }
        prev = Some(cur);
    }
    let canonical = serde_json::to_string(&v).map_err(|e| e.to_string())? + "\n";
    ensure(canonical == out, || "output is not in canonical form".into())?;
    let (_, again, _) = cli(&["funnel", "sin(x)-x", "--at", "0", "--format", "json"]);
    ensure(again == out, || "output differs between runs".into())?;
    Ok(format!("{} strictly nested boxes", boxes.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("trig table via `verify trig`", c1_trig_table),
        ("oracle agreement on base and extended grids", c2_oracle_agreement),
        ("summation identities on 16x16 grids", c3_summation),
        ("derivative-at-zero squeezes", c4_derivative_at_zero),
        ("parallelogram bound", c5_parallelogram),
        ("jet slopes vs central differences", c6_slopes),
        ("envelope algebra closure", c7_closure),
        ("L'Hopital limits", c8_lhopital),
        ("Taylor coefficients and Peano check", c9_taylor),
        ("FTC contracts and ln/exp round trip", c10_ftc),
        ("funnel output of sin(x)-x", c11_funnel),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{took:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{took:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
