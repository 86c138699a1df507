//! Witnesses for the critical point, mean value and Cauchy mean value
//! theorems, and limits of quotients in approximation form.
//!
//! The theorems only assert existence; here a point is searched for and the
//! asserted equality is checked through the jet slope at that point.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::envelope::{certification_grid, env_scale_bounded, env_sum, one_sided_grid, slack, ErrorEnvelope, GRID_HALF};
use crate::error::{Error, Result};
use crate::jet::Jet1;
use crate::scalar::Real;

/// Uniform scan size for witness searches.
pub const SCAN_POINTS: usize = 1024;
const MAX_REFINE: usize = 200;

/// A point `a < c < b` where an asserted equality holds up to `residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<T: Real> {
    pub op: &'static str,
    pub c: T,
    pub residual: T,
    pub iterations: usize,
    pub pass: bool,
    /// Envelope of the jet used to read the slope at `c`.
    pub env: ErrorEnvelope<T>,
}

impl<T: Real> Witness<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "op": self.op,
            "c_or_L": self.c.f64(),
            "residual": self.residual.f64(),
            "env": self.env.to_json(),
            "pass": self.pass,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Side::Left => -T::one(),
            Side::Right => T::one(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::InvalidArgument(format!("side must be left or right, got {s}"))),
        }
    }
}

fn scan<T: Real, F>(f: &F, a: T, b: T) -> Result<(Vec<T>, Vec<T>)>
where
    F: Fn(T) -> Result<T> + Sync,
{
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
    }
    let last = T::from_usize_(SCAN_POINTS - 1);
    let xs: Vec<T> = (0..SCAN_POINTS)
        .map(|i| if i == SCAN_POINTS - 1 { b } else { a + (b - a) * T::from_usize_(i) / last })
        .collect();
    let vs: Vec<T> = xs.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    if let Some(i) = vs.iter().position(|v| !v.is_finite()) {
        return Err(Error::SamplerFailure { eps: xs[i].f64() });
    }
    Ok((xs, vs))
}

/// Interior point of the scan where `f` is extremal, refined to a zero of
/// the slope. Returns `None` when every extremum sits on the boundary.
pub fn find_critical<T, F, J>(f: F, fj: J, a: T, b: T, tol: T) -> Result<Option<Witness<T>>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
    J: Fn(T) -> Result<Jet1<T>>,
{
    critical_search("cpt", &f, &|x| fj(x), a, b, tol, |j| j.slope.abs())
}

fn critical_search<T, F, J, R>(op: &'static str, f: &F, fj: &J, a: T, b: T, tol: T, residual: R) -> Result<Option<Witness<T>>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
    J: Fn(T) -> Result<Jet1<T>>,
    R: Fn(&Jet1<T>) -> T,
{
    let (xs, vs) = scan(f, a, b)?;
    let n = xs.len();
    let hi = vs.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = vs.iter().copied().fold(T::infinity(), T::min);
    let mut picks: Vec<(usize, bool)> = Vec::new();
    for (target, is_max) in [(hi, true), (lo, false)] {
        if let Some(i) = (1..n - 1).find(|&i| vs[i] == target) {
            picks.push((i, is_max));
        }
    }
    if hi == lo {
        picks = vec![(1, true)];
    }
    let mut found: Vec<Witness<T>> = Vec::new();
    for (i, is_max) in picks {
        let (c, iterations) = if hi == lo { (xs[1], 0) } else { refine(f, fj, xs[i - 1], xs[i + 1], is_max)? };
        let j = fj(c)?;
        let res = residual(&j);
        found.push(Witness { op, c, residual: res, iterations, pass: res <= tol, env: j.env.clone() });
    }
    found.sort_by(|x, y| (!x.pass).cmp(&!y.pass).then(x.c.partial_cmp(&y.c).expect("finite")));
    Ok(found.into_iter().next())
}

/// Bisection on the slope sign when it changes across the bracket, else
/// golden-section search on the values.
fn refine<T, F, J>(f: &F, fj: &J, mut lo: T, mut hi: T, is_max: bool) -> Result<(T, usize)>
where
    T: Real,
    F: Fn(T) -> Result<T>,
    J: Fn(T) -> Result<Jet1<T>>,
{
    let orient = if is_max { -T::one() } else { T::one() };
    let s_lo = fj(lo)?.slope * orient;
    let s_hi = fj(hi)?.slope * orient;
    if s_lo <= T::zero() && s_hi >= T::zero() {
        for it in 0..MAX_REFINE {
            let mid = (lo + hi) * T::half();
            if mid <= lo || mid >= hi {
                return Ok((mid, it));
            }
            let s = fj(mid)?.slope * orient;
            if s == T::zero() {
                return Ok((mid, it + 1));
            }
            if s < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok(((lo + hi) * T::half(), MAX_REFINE));
    }
    let g = T::lit(0.618_033_988_749_894_9);
    let better = |u: T, v: T| if is_max { u >= v } else { u <= v };
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for it in 0..MAX_REFINE {
        if hi - lo <= T::lit(4.0) * T::epsilon() * (lo.abs() + hi.abs()) {
            return Ok(((lo + hi) * T::half(), it));
        }
        if better(f1, f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(((lo + hi) * T::half(), MAX_REFINE))
}

/// `c` with `f'(c)` equal to the secant slope, found as a critical point of
/// `f(x) − m·x`.
pub fn mvt_witness<T, F, J>(f: F, fj: J, a: T, b: T, tol: T) -> Result<Option<Witness<T>>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
    J: Fn(T) -> Result<Jet1<T>>,
{
    let m = (f(b)? - f(a)?) / (b - a);
    let h = |x: T| Ok(f(x)? - m * x);
    let hj = |x: T| {
        let j = fj(x)?;
        Ok(Jet1 { x0: j.x0, value: j.value - m * x, slope: j.slope - m, env: j.env })
    };
    critical_search("mvt", &h, &hj, a, b, tol, |j| j.slope.abs())
}

/// `c` with `f'(c)/g'(c) = (f(b) − f(a))/(g(b) − g(a))`, found as a critical
/// point of `f·Δg − g·Δf`. `g'` must not vanish on the scan.
pub fn cmvt_witness<T, F, G, FJ, GJ>(f: F, g: G, fj: FJ, gj: GJ, a: T, b: T, tol: T) -> Result<Option<Witness<T>>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
    G: Fn(T) -> Result<T> + Sync,
    FJ: Fn(T) -> Result<Jet1<T>> + Sync,
    GJ: Fn(T) -> Result<Jet1<T>> + Sync,
{
    let (xs, _) = scan(&|x| Ok(x), a, b)?;
    let slopes: Vec<T> = xs.par_iter().map(|&x| gj(x).map(|j| j.slope)).collect::<Result<_>>()?;
    let s0 = slopes[0];
    if let Some(i) = slopes.iter().position(|&s| s == T::zero() || s.signum() != s0.signum()) {
        return Err(Error::Precondition(format!("g' vanishes or changes sign near {}", xs[i])));
    }
    let df = f(b)? - f(a)?;
    let dg = g(b)? - g(a)?;
    let ratio = df / dg;
    let h = |x: T| Ok(f(x)? * dg - g(x)? * df);
    let hj = |x: T| {
        let (jf, jg) = (fj(x)?, gj(x)?);
        let env = env_sum(&env_scale_bounded(&jf.env, dg.abs())?, &env_scale_bounded(&jg.env, df.abs())?)?;
        Ok(Jet1 { x0: x, value: jf.value * dg - jg.value * df, slope: jf.slope * dg - jg.slope * df, env })
    };
    let w = critical_search("cmvt", &h, &hj, a, b, T::infinity(), |_| T::zero())?;
    let Some(mut w) = w else { return Ok(None) };
    let (jf, jg) = (fj(w.c)?, gj(w.c)?);
    w.residual = (jf.slope / jg.slope - ratio).abs();
    w.pass = w.residual <= tol;
    Ok(Some(w))
}

/// Limit of a quotient with its certified error function.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitVerdict<T: Real> {
    pub op: &'static str,
    pub limit: T,
    /// `|ratio − L|` at the smallest sampled `ε`.
    pub residual: T,
    pub env: ErrorEnvelope<T>,
    /// Fitted coefficient before the 10% inflation.
    pub raw_c: T,
    pub pass: bool,
    pub witness: Option<T>,
}

impl<T: Real> LimitVerdict<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "op": self.op,
            "c_or_L": self.limit.f64(),
            "residual": self.residual.f64(),
            "env": self.env.to_json(),
            "pass": self.pass,
        })
    }
}

/// `f/g` at a common zero from the two jets:
/// `(s_f + σE_f)/(s_g + σE_g) − L = σ(E_f − L·E_g)/(s_g + σE_g)`, so the
/// error is at most `2(E_f + |L|E_g)/|s_g|` where `E_g ≤ |s_g|/2`.
/// The envelope is then checked against samples of `f/g`; `noise` is the
/// absolute evaluation noise of `f` and `g`.
pub fn lhopital_00<T, F, G>(fj: &Jet1<T>, gj: &Jet1<T>, f: F, g: G, noise: T) -> Result<LimitVerdict<T>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
    G: Fn(T) -> Result<T> + Sync,
{
    if fj.x0 != gj.x0 {
        return Err(Error::BasePointMismatch { left: fj.x0.f64(), right: gj.x0.f64() });
    }
    let zero = T::lit(1e-12);
    if fj.value.abs() > zero || gj.value.abs() > zero {
        return Err(Error::Precondition(format!("f and g must vanish at x0, got {} and {}", fj.value, gj.value)));
    }
    if gj.slope == T::zero() {
        return Err(Error::Precondition("denominator slope is zero; use the general form".into()));
    }
    let l = fj.slope / gj.slope;
    let sg = gj.slope.abs();
    let env = if fj == gj {
        ErrorEnvelope::zero(fj.env.radius().min(T::one()))
    } else {
        let (cg, pg) = (gj.env.coeff(), gj.env.power());
        let mut r = fj.env.radius().min(gj.env.radius()).min(T::one());
        for _ in 0..MAX_REFINE {
            if cg * r.powf(pg) <= sg * T::half() {
                break;
            }
            r = r * T::half();
        }
        let num = env_sum(&fj.env.restricted(r), &env_scale_bounded(&gj.env.restricted(r), l.abs())?)?;
        env_scale_bounded(&num, T::two() / sg)?
    };
    let x0 = fj.x0;
    let grid = certification_grid(env.radius());
    let rows: Vec<(T, T, T)> = grid
        .par_iter()
        .filter(|&&e| e != T::zero())
        .map(|&e| {
            let x = x0 + e;
            let eff = x - x0;
            let (fv, gv) = (f(x)?, g(x)?);
            if gv == T::zero() {
                return Err(Error::VanishingDenominator { eps: eff.f64() });
            }
            let ratio = fv / gv;
            Ok((eff, ratio - l, ratio_noise(noise, ratio, gv)))
        })
        .collect::<Result<_>>()?;
    let k = slack::<T>();
    let witness = rows.iter().find(|(e, res, d)| res.abs() > env.bound(*e) * k + *d).map(|r| r.0);
    let residual = rows.iter().filter(|r| r.0 > T::zero()).map(|r| r.1.abs()).next().unwrap_or(T::zero());
    Ok(LimitVerdict { op: "lhopital_00", limit: l, residual, raw_c: env.coeff(), pass: witness.is_none(), witness, env })
}

/// Noise of `u/v` from absolute noise `d` in both: `d(1 + |u/v|)/|v|`, times
/// a safety factor.
fn ratio_noise<T: Real>(d: T, ratio: T, v: T) -> T {
    T::lit(64.0) * d * (T::one() + ratio.abs()) / v.abs()
}

/// Least-squares slope of `log|v|` against `log|ε|`.
fn log_slope<T: Real>(pts: &[(T, T)]) -> Option<T> {
    let pts: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(e, v)| *e != T::zero() && *v != T::zero() && v.is_finite())
        .map(|(e, v)| (e.abs().f64().ln(), v.abs().f64().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| T::lit(sxy / sxx))
}

/// Which indeterminate form a one-sided quotient has.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `f, g → 0`.
    ZeroZero,
    /// `1/g` is an error function.
    Unbounded,
}

/// Least power accepted as "tends to zero" when classifying and certifying.
const MIN_POWER: f64 = 0.1;

/// Fit `C|ε|^p` to the rows `(ε, residual, noise)` above their noise on the
/// coarse grid, inflate `C` by 10%, then certify on the fine rows.
fn fit_and_certify<T: Real>(op: &'static str, limit: T, r: T, coarse: &[(T, T, T)], fine: &[(T, T, T)]) -> Result<LimitVerdict<T>> {
    let sig: Vec<(T, T)> = coarse
        .iter()
        .filter(|(e, v, d)| *e != T::zero() && v.abs() > *d)
        .map(|(e, v, _)| (*e, *v))
        .collect();
    let residual = coarse.iter().min_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).expect("finite")).map_or(T::zero(), |r| r.1.abs());
    if sig.is_empty() {
        let pass = fine.iter().all(|(_, v, d)| v.abs() <= *d);
        return Ok(LimitVerdict { op, limit, residual, env: ErrorEnvelope::zero(r), raw_c: T::zero(), pass, witness: None });
    }
    let p = log_slope(&sig).unwrap_or(T::one());
    let smallest = sig.iter().min_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).expect("finite")).expect("non-empty");
    let largest = sig.iter().map(|s| s.1.abs()).fold(T::zero(), T::max);
    let shrinks = sig.len() < 2 || smallest.1.abs() < largest;
    if !(p >= T::lit(MIN_POWER)) || !shrinks {
        let env = ErrorEnvelope::zero(r);
        return Ok(LimitVerdict { op, limit, residual, env, raw_c: T::infinity(), pass: false, witness: Some(smallest.0) });
    }
    let raw = sig.iter().map(|(e, v)| v.abs() / e.abs().powf(p)).fold(T::zero(), T::max);
    let env = ErrorEnvelope::analytic(raw * T::lit(1.1), p, r)?;
    let k = slack::<T>();
    let witness = fine.iter().find(|(e, v, d)| v.abs() > env.bound(*e) * k + *d).map(|w| w.0);
    Ok(LimitVerdict { op, limit, residual, env, raw_c: raw, pass: witness.is_none(), witness })
}

/// The `ε` values on one side: the coarse `r·2^-k` grid and the fine half of
/// the certification grid.
fn side_grids<T: Real>(r: T, side: Side) -> (Vec<T>, Vec<T>) {
    let s: T = side.sign();
    let coarse = one_sided_grid(r).into_iter().map(|e| e * s).collect();
    let fine = certification_grid(r)[GRID_HALF + 1..].iter().map(|&e| e * s).collect();
    (coarse, fine)
}

/// One-sided limit of `f/g` at `x0` with a claimed value.
///
/// Either both `f, g → 0` on the samples, or `1/g → 0`. The residual
/// `f/g − L` is fitted by `C|ε|^p` and certified on the fine grid; `noise` is
/// the absolute evaluation noise of `f` and `g`.
pub fn lhopital_general<T, F, G>(f: F, g: G, x0: T, side: Side, claimed: T, r: T, noise: T) -> Result<(Form, LimitVerdict<T>)>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
    G: Fn(T) -> Result<T> + Sync,
{
    let (coarse, fine) = side_grids(r, side);
    let sample = |eps: &[T]| -> Result<Vec<(T, T, T, T)>> {
        eps.par_iter()
            .map(|&e| {
                let x = x0 + e;
                let eff = x - x0;
                let (fv, gv) = (f(x)?, g(x)?);
                if gv == T::zero() || !gv.is_finite() || !fv.is_finite() {
                    return Err(Error::VanishingDenominator { eps: eff.f64() });
                }
                Ok((eff, fv, gv, fv / gv))
            })
            .collect()
    };
    let cs = sample(&coarse)?;
    let g_pts: Vec<(T, T)> = cs.iter().map(|q| (q.0, q.2)).collect();
    let f_pts: Vec<(T, T)> = cs.iter().filter(|q| q.1.abs() > noise).map(|q| (q.0, q.1)).collect();
    let inv_pts: Vec<(T, T)> = cs.iter().map(|q| (q.0, T::one() / q.2)).collect();
    let tends = |pts: &[(T, T)]| log_slope(pts).is_some_and(|p| p >= T::lit(MIN_POWER));
    let f_small = f_pts.len() < 2 || tends(&f_pts);
    let form = if tends(&g_pts) && f_small {
        Form::ZeroZero
    } else if tends(&inv_pts) {
        Form::Unbounded
    } else {
        return Err(Error::Precondition("neither f, g -> 0 nor 1/g -> 0 on the samples".into()));
    };
    let rows = |s: &[(T, T, T, T)]| s.iter().map(|&(e, _, gv, q)| (e, q - claimed, ratio_noise(noise, q, gv))).collect::<Vec<_>>();
    let fs = sample(&fine)?;
    Ok((form, fit_and_certify("lhopital", claimed, r, &rows(&cs), &rows(&fs))?))
}

/// Envelope of the derivative ratio `f'/g' − L` on one side of `x0`, read
/// from the jets at the sample points.
pub fn derivative_ratio_envelope<T, FJ, GJ>(fj: FJ, gj: GJ, x0: T, side: Side, claimed: T, r: T, noise: T) -> Result<LimitVerdict<T>>
where
    T: Real,
    FJ: Fn(T) -> Result<Jet1<T>> + Sync,
    GJ: Fn(T) -> Result<Jet1<T>> + Sync,
{
    let (coarse, fine) = side_grids(r, side);
    let rows = |eps: &[T]| -> Result<Vec<(T, T, T)>> {
        eps.par_iter()
            .map(|&e| {
                let x = x0 + e;
                let (a, b) = (fj(x)?, gj(x)?);
                if b.slope == T::zero() {
                    return Err(Error::VanishingDenominator { eps: (x - x0).f64() });
                }
                let q = a.slope / b.slope;
                Ok((x - x0, q - claimed, T::lit(64.0) * noise * (T::one() + q.abs())))
            })
            .collect()
    };
    fit_and_certify("derivative_ratio", claimed, r, &rows(&coarse)?, &rows(&fine)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomfun::geometry;

    fn poly(c: &'static [f64]) -> (impl Fn(f64) -> Result<f64> + Sync, impl Fn(f64) -> Result<Jet1<f64>> + Sync) {
        let f = move |x: f64| Ok(c.iter().rev().fold(0.0, |a, &k| a * x + k));
        let fj = move |x: f64| {
            let v = c.iter().rev().fold(0.0, |a, &k| a * x + k);
            let s = c.iter().enumerate().skip(1).rev().fold(0.0, |a, (i, &k)| a * x + i as f64 * k);
            Ok(Jet1 { x0: x, value: v, slope: s, env: ErrorEnvelope::zero(1.0) })
        };
        (f, fj)
    }

    #[test]
    fn critical_point_of_square() {
        let (f, fj) = poly(&[0.0, 0.0, 1.0]);
        let w = find_critical(f, fj, -1.0, 2.0, 1e-9).unwrap().unwrap();
        assert!(w.pass && w.c.abs() < 1e-9, "{w:?}");
    }

    #[test]
    fn monotone_has_no_interior_witness() {
        let (f, fj) = poly(&[0.0, 1.0]);
        assert!(find_critical(f, fj, 0.0, 1.0, 1e-9).unwrap().is_none());
    }

    #[test]
    fn sine_peak() {
        let g = geometry();
        let w = find_critical(|x| Ok(g.cos_sin(x, 1e-12)?.1), |x| g.sin_jet(x, 1e-12), 0.0, 3.14159, 1e-9).unwrap().unwrap();
        assert!(w.pass && (w.c - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{w:?}");
    }

    #[test]
    fn mean_values() {
        let (f, fj) = poly(&[0.0, 0.0, 1.0]);
        let w = mvt_witness(f, fj, 0.0, 2.0, 1e-9).unwrap().unwrap();
        assert!(w.pass && (w.c - 1.0).abs() < 1e-9, "{w:?}");
        let (f, fj) = poly(&[0.0, 0.0, 0.0, 1.0]);
        let w = mvt_witness(f, fj, -1.0, 1.0, 1e-9).unwrap().unwrap();
        assert!(w.pass && (w.c + 1.0 / 3f64.sqrt()).abs() < 1e-9, "{w:?}");
        let (f, fj) = poly(&[2.5]);
        let w = mvt_witness(f, fj, 0.0, 1.0, 1e-9).unwrap().unwrap();
        assert!(w.pass && w.residual == 0.0 && w.c > 0.0 && w.c < 1.0);
    }

    #[test]
    fn cauchy_mean_value() {
        let (f, fj) = poly(&[0.0, 0.0, 1.0]);
        let (g, gj) = poly(&[0.0, 0.0, 0.0, 1.0]);
        let w = cmvt_witness(f, g, fj, gj, 1.0, 2.0, 1e-9).unwrap().unwrap();
        assert!(w.pass && (w.c - 14.0 / 9.0).abs() < 1e-9, "{w:?}");
        let (f, fj) = poly(&[0.0, 0.0, 1.0]);
        let (g, gj) = poly(&[0.0, 0.0, 1.0]);
        assert!(matches!(cmvt_witness(f, g, fj, gj, -1.0, 1.0, 1e-9), Err(Error::Precondition(_))));
    }

    #[test]
    fn sine_over_x() {
        let g = geometry();
        let fj = g.sin_jet(0.0, 1e-12).unwrap();
        let v = lhopital_00(&fj, &Jet1::var(0.0), |x| Ok(g.cos_sin(x, 1e-12)?.1), |x| Ok(x), 1e-12).unwrap();
        assert!(v.pass && v.limit == 1.0, "{v:?}");
        let (f, _) = poly(&[0.0, 0.0, 1.0]);
        let sq = Jet1 { x0: 0.0, value: 0.0, slope: 0.0, env: ErrorEnvelope::linear(1.0, 1.0) };
        let v = lhopital_00(&sq, &Jet1::var(0.0), f, |x| Ok(x), 0.0).unwrap();
        assert!(v.pass && v.limit == 0.0);
        let same = lhopital_00(&fj, &fj, |x| Ok(g.cos_sin(x, 1e-12)?.1), |x| Ok(g.cos_sin(x, 1e-12)?.1), 1e-12).unwrap();
        assert!(same.env.is_zero() && same.limit == 1.0);
    }

    #[test]
    fn general_forms() {
        let g = geometry();
        let (form, v) = lhopital_general(|x| Ok(g.cos_sin(x, 1e-12)?.0 - 1.0), |x| Ok(x * x), 0.0, Side::Right, -0.5, 1.0, 1e-12).unwrap();
        assert_eq!(form, Form::ZeroZero);
        assert!(v.pass, "{v:?}");
        let (form, v) = lhopital_general(|x| g.ln(x, 1e-12), |x| Ok(1.0 / x), 0.0, Side::Right, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(form, Form::Unbounded);
        assert!(v.pass, "{v:?}");
        let (_, v) = lhopital_general(|x| Ok(g.cos_sin(x, 1e-12)?.1), |x| Ok(x), 0.0, Side::Left, 0.9, 1.0, 1e-12).unwrap();
        assert!(!v.pass && v.witness.is_some());
        assert!(matches!(
            lhopital_general(|x| Ok(1.0 + x), |x| Ok(2.0 + x), 0.0, Side::Right, 0.5, 1.0, 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn x_log_x_derivative_ratio_is_minus_x() {
        let g = geometry();
        let v = derivative_ratio_envelope(
            |x| g.ln_jet(x, 1e-12),
            |x| Jet1::var(x).recip(),
            0.0,
            Side::Right,
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!(v.pass, "{v:?}");
        assert!((v.env.power() - 1.0).abs() < 1e-2 && (v.raw_c - 1.0).abs() < 0.1, "{v:?}");
    }
}
