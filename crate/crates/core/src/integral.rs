//! Bracketed integration and the jet of an integral.
//!
//! On a monotone piece the left and right endpoint values give piecewise
//! constant functions `m ≤ f ≤ M`, so the rectangle sums enclose the area.
//! When rectangles alone cannot reach the tolerance and fourth derivatives
//! are available, end-corrected trapezoid and midpoint sums are added on
//! pieces where `f''''` keeps one sign; their errors then have opposite
//! signs and the two sums enclose the area as well.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::envelope::{slack, Certification, ErrorEnvelope, Witness};
use crate::error::{Error, Result};
use crate::expr::{Engine, Expr};
use crate::geomfun::{AreaBracket, CorrectedQuad};
use crate::jet::{Jet0, Jet1};
use crate::scalar::{CompensatedSum, Real};

/// Points of the slope-sign scan used for segmentation.
pub const SCAN_POINTS: usize = 257;
/// Panel cap per monotone segment for rectangle sums.
pub const RECT_CAP: usize = 1 << 10;
/// Panel cap per piece for corrected sums.
pub const CORRECTED_CAP: usize = 1 << 16;
const BISECT: usize = 100;
const CURVATURE_SCAN: usize = 33;

/// Function to integrate.
pub trait Integrand<T: Real>: Sync {
    fn value(&self, x: T) -> Result<T>;

    /// Taylor coefficients `c_0..=c_k` at `x`, when available.
    fn derivs(&self, _x: T, _k: usize) -> Option<Result<Vec<T>>> {
        None
    }

    /// Absolute error of [`Self::value`] for values of size `scale`.
    fn noise(&self, scale: T) -> T {
        T::lit(8.0) * T::epsilon() * (T::one() + scale.abs())
    }
}

/// Plain evaluator.
pub struct FnIntegrand<F>(pub F);

impl<T: Real, F: Fn(T) -> Result<T> + Sync> Integrand<T> for FnIntegrand<F> {
    fn value(&self, x: T) -> Result<T> {
        (self.0)(x)
    }
}

/// Expression evaluated by an engine; derivatives come from its series.
pub struct ExprIntegrand<'a, 'g, T: Real> {
    engine: Engine<'g, T>,
    expr: &'a Expr,
}

impl<'a, 'g, T: Real> ExprIntegrand<'a, 'g, T> {
    /// Values are taken at the engine's sampling tolerance.
    pub fn new(engine: &Engine<'g, T>, expr: &'a Expr) -> Self {
        Self { engine: engine.sampler(), expr }
    }
}

impl<'a, 'g, T: Real> Integrand<T> for ExprIntegrand<'a, 'g, T> {
    fn value(&self, x: T) -> Result<T> {
        self.engine.value(self.expr, x)
    }

    fn derivs(&self, x: T, k: usize) -> Option<Result<Vec<T>>> {
        Some(self.engine.series(self.expr, x, k))
    }

    fn noise(&self, scale: T) -> T {
        self.engine.eval_noise(self.expr, scale)
    }
}

/// Enclosure of `∫_a^b f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralBracket<T> {
    pub a: T,
    pub b: T,
    pub lo: T,
    pub hi: T,
    pub n_panels: usize,
    /// False when monotone segmentation had to be guessed from values.
    pub rigorous: bool,
}

impl<T: Real> IntegralBracket<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        (self.lo + self.hi) * T::half()
    }

    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn to_json(&self) -> Value {
        json!({
            "a": self.a.f64(),
            "b": self.b.f64(),
            "lo": self.lo.f64(),
            "hi": self.hi.f64(),
            "n_panels": self.n_panels,
            "rigorous": self.rigorous,
        })
    }
}

/// Monotone segment with its rectangle grid.
struct Segment<T> {
    s: T,
    t: T,
    vals: Vec<T>,
}

impl<T: Real> Segment<T> {
    fn new<I: Integrand<T>>(f: &I, s: T, t: T, n: usize) -> Result<Self> {
        let h = (t - s) / T::from_usize_(n);
        let vals = (0..=n)
            .into_par_iter()
            .map(|i| f.value(if i == n { t } else { s + h * T::from_usize_(i) }))
            .collect::<Result<Vec<T>>>()?;
        check_finite(&vals, s)?;
        Ok(Self { s, t, vals })
    }

    fn panels(&self) -> usize {
        self.vals.len() - 1
    }

    fn refine<I: Integrand<T>>(&mut self, f: &I) -> Result<()> {
        let n = self.panels();
        let h = (self.t - self.s) / T::from_usize_(2 * n);
        let mids = (0..n)
            .into_par_iter()
            .map(|i| f.value(self.s + h * T::from_usize_(2 * i + 1)))
            .collect::<Result<Vec<T>>>()?;
        check_finite(&mids, self.s)?;
        let mut vals = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            vals.push(self.vals[i]);
            vals.push(mids[i]);
        }
        vals.push(self.vals[n]);
        self.vals = vals;
        Ok(())
    }

    /// Lower and upper rectangle sums, padded for rounding and noise.
    fn bracket<I: Integrand<T>>(&self, f: &I) -> AreaBracket<T> {
        let n = self.panels();
        let h = (self.t - self.s) / T::from_usize_(n);
        let mut lo = CompensatedSum::new();
        let mut hi = CompensatedSum::new();
        let mut abs = T::zero();
        let mut scale = T::zero();
        for w in self.vals.windows(2) {
            lo.add(w[0].min(w[1]));
            hi.add(w[0].max(w[1]));
            abs = abs + w[0].abs();
            scale = scale.max(w[0].abs());
        }
        let pad = T::lit(4.0) * T::epsilon() * h * abs + f.noise(scale) * (self.t - self.s);
        AreaBracket::new(h * lo.value() - pad, h * hi.value() + pad, n)
    }
}

fn check_finite<T: Real>(v: &[T], at: T) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::SamplerFailure { eps: at.f64() })
    }
}

/// Rectangle bracket of `∫_a^b f` with `n` panels, assuming `f` monotone on
/// `[a, b]`.
pub fn rectangle_bracket<T: Real, I: Integrand<T>>(f: &I, a: T, b: T, n: usize) -> Result<AreaBracket<T>> {
    Ok(Segment::new(f, a, b, n.max(1))?.bracket(f))
}

fn slope<T: Real, I: Integrand<T>>(f: &I, x: T) -> Option<Result<T>> {
    f.derivs(x, 1).map(|r| r.map(|c| c[1]))
}

/// Breakpoints splitting `[a, b]` into monotone segments, and whether they
/// came from slope signs (rigorous up to sampling) or from values.
fn segment_points<T: Real, I: Integrand<T>>(f: &I, a: T, b: T) -> Result<(Vec<T>, bool)> {
    let last = T::from_usize_(SCAN_POINTS - 1);
    let xs: Vec<T> = (0..SCAN_POINTS)
        .map(|i| if i == SCAN_POINTS - 1 { b } else { a + (b - a) * T::from_usize_(i) / last })
        .collect();
    let slopes: Option<Vec<T>> = xs
        .par_iter()
        .map(|&x| slope(f, x).and_then(|r| r.ok()))
        .collect();
    let mut cuts = vec![a];
    if let Some(ss) = slopes {
        // zero slopes are flat: they continue either direction
        let mut last_sign = T::zero();
        let mut last_x = a;
        for (i, &s) in ss.iter().enumerate() {
            if s == T::zero() || !s.is_finite() {
                continue;
            }
            let sign = s.signum();
            if last_sign != T::zero() && sign != last_sign {
                cuts.push(bisect_slope(f, last_x, xs[i], last_sign)?);
            }
            last_sign = sign;
            last_x = xs[i];
        }
        cuts.push(b);
        return Ok((cuts, true));
    }
    let vs: Vec<T> = xs.par_iter().map(|&x| f.value(x)).collect::<Result<_>>()?;
    check_finite(&vs, a)?;
    let mut last_sign = T::zero();
    let mut guessed = false;
    for i in 1..SCAN_POINTS {
        let d = vs[i] - vs[i - 1];
        if d == T::zero() {
            continue;
        }
        let sign = d.signum();
        if last_sign != T::zero() && sign != last_sign {
            cuts.push(golden_extremum(f, xs[i - 2].max(a), xs[i], last_sign > T::zero())?);
            guessed = true;
        }
        last_sign = sign;
    }
    cuts.push(b);
    Ok((cuts, !guessed))
}

/// Zero of the slope between `lo` (slope sign `s_lo`) and `hi`.
fn bisect_slope<T: Real, I: Integrand<T>>(f: &I, mut lo: T, mut hi: T, s_lo: T) -> Result<T> {
    for _ in 0..BISECT {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        let s = slope(f, mid).expect("slopes available")?;
        if s == T::zero() {
            return Ok(mid);
        }
        if s.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::half())
}

fn golden_extremum<T: Real, I: Integrand<T>>(f: &I, mut lo: T, mut hi: T, is_max: bool) -> Result<T> {
    let g = T::lit(0.618_033_988_749_894_9);
    let better = |u: T, v: T| if is_max { u >= v } else { u <= v };
    for _ in 0..BISECT {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if !(x1 < x2) {
            break;
        }
        if better(f.value(x1)?, f.value(x2)?) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok((lo + hi) * T::half())
}

/// Pieces of `[s, t]` on which the sampled `f''''` keeps one sign.
fn curvature_pieces<T: Real, I: Integrand<T>>(f: &I, s: T, t: T) -> Option<Result<Vec<(T, T)>>> {
    let fourth = |x: T| f.derivs(x, 4).map(|r| r.map(|c| c[4]));
    if fourth(s)?.is_err() {
        return None;
    }
    let run = || -> Result<Vec<(T, T)>> {
        let last = T::from_usize_(CURVATURE_SCAN - 1);
        let xs: Vec<T> = (0..CURVATURE_SCAN)
            .map(|i| if i == CURVATURE_SCAN - 1 { t } else { s + (t - s) * T::from_usize_(i) / last })
            .collect();
        let c4: Vec<T> = xs.par_iter().map(|&x| fourth(x).expect("derivatives available")).collect::<Result<_>>()?;
        let mut cuts = vec![s];
        let mut last_sign = T::zero();
        let mut last_x = s;
        for (i, &c) in c4.iter().enumerate() {
            if c == T::zero() || !c.is_finite() {
                continue;
            }
            let sign = c.signum();
            if last_sign != T::zero() && sign != last_sign {
                let (mut lo, mut hi) = (last_x, xs[i]);
                for _ in 0..BISECT {
                    let mid = (lo + hi) * T::half();
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let v = fourth(mid).expect("derivatives available")?;
                    if v.signum() == last_sign {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                cuts.push((lo + hi) * T::half());
            }
            last_sign = sign;
            last_x = xs[i];
        }
        cuts.push(t);
        Ok(cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| a < b).collect())
    };
    Some(run())
}

fn total<T: Real>(parts: &[AreaBracket<T>]) -> AreaBracket<T> {
    parts.iter().fold(AreaBracket::exact(T::zero()), |acc, p| acc.add(p))
}

/// `∫_a^b f` to width `tol`.
///
/// Reversed endpoints give the negated bracket of the forward integral.
pub fn integrate<T: Real, I: Integrand<T>>(f: &I, a: T, b: T, tol: T) -> Result<IntegralBracket<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument("integration endpoints must be finite".into()));
    }
    if a == b {
        return Ok(IntegralBracket { a, b, lo: T::zero(), hi: T::zero(), n_panels: 0, rigorous: true });
    }
    if b < a {
        let fwd = integrate(f, b, a, tol)?;
        return Ok(IntegralBracket { a, b, lo: -fwd.hi, hi: -fwd.lo, ..fwd });
    }
    let (cuts, rigorous) = segment_points(f, a, b)?;
    let mut segs: Vec<Segment<T>> = cuts
        .windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| Segment::new(f, w[0], w[1], 1))
        .collect::<Result<_>>()?;
    let mut brackets: Vec<AreaBracket<T>> = segs.iter().map(|s| s.bracket(f)).collect();
    // rectangle phase: refine the widest segment
    loop {
        let sum = total(&brackets);
        if sum.width() <= tol {
            let n = segs.iter().map(|s| s.panels()).sum();
            return Ok(IntegralBracket { a, b, lo: sum.lo, hi: sum.hi, n_panels: n, rigorous });
        }
        let widest = (0..segs.len())
            .filter(|&i| segs[i].panels() < RECT_CAP)
            .max_by(|&i, &j| brackets[i].width().partial_cmp(&brackets[j].width()).expect("finite"));
        let Some(i) = widest else { break };
        segs[i].refine(f)?;
        let next = segs[i].bracket(f);
        brackets[i] = next.intersect(&brackets[i]);
    }
    let rect = total(&brackets);
    let rect_panels: usize = segs.iter().map(|s| s.panels()).sum();
    let corrected = corrected_phase(f, &cuts, tol)?;
    // disjoint brackets mean a sampled hypothesis failed; keep the rectangles
    let (best, panels) = match corrected {
        Some((c, n)) if c.lo <= rect.hi && rect.lo <= c.hi => (c.intersect(&rect), rect_panels + n),
        _ => (rect, rect_panels),
    };
    if best.width() > tol {
        return Err(Error::ToleranceUnreachable { tol: tol.f64(), width: best.width().f64() });
    }
    Ok(IntegralBracket { a, b, lo: best.lo, hi: best.hi, n_panels: panels, rigorous })
}

/// Corrected trapezoid/midpoint brackets on the one-signed curvature pieces
/// of every segment. `None` when derivatives are unavailable.
fn corrected_phase<T: Real, I: Integrand<T>>(f: &I, cuts: &[T], tol: T) -> Result<Option<(AreaBracket<T>, usize)>> {
    let mut pieces: Vec<(T, T)> = Vec::new();
    for w in cuts.windows(2).filter(|w| w[0] < w[1]) {
        match curvature_pieces(f, w[0], w[1]) {
            None => return Ok(None),
            Some(Err(_)) => return Ok(None),
            Some(Ok(p)) => pieces.extend(p),
        }
    }
    let failed = std::sync::atomic::AtomicBool::new(false);
    let eval = |x: T, s: T, t: T| -> (T, T) {
        let r = if x == s || x == t {
            f.derivs(x, 1).expect("derivatives available").map(|c| (c[0], c[1]))
        } else {
            f.value(x).map(|v| (v, T::zero()))
        };
        r.unwrap_or_else(|_| {
            failed.store(true, std::sync::atomic::Ordering::Relaxed);
            (T::nan(), T::nan())
        })
    };
    let mut quads: Vec<_> = pieces.iter().map(|&(s, t)| CorrectedQuad::new(move |x| eval(x, s, t), s, t, 4)).collect();
    let padded = |q: &CorrectedQuad<T, _>, s: T, t: T| {
        let b = q.bracket();
        let scale = b.lo.abs().max(b.hi.abs()) / (t - s);
        let pad = T::two() * f.noise(scale) * (t - s);
        AreaBracket::new(b.lo - pad, b.hi + pad, b.n_panels)
    };
    let mut parts: Vec<AreaBracket<T>> = quads.iter().zip(&pieces).map(|(q, &(s, t))| padded(q, s, t)).collect();
    let mut done = vec![false; quads.len()];
    loop {
        if failed.load(std::sync::atomic::Ordering::Relaxed) {
            return Ok(None);
        }
        let sum = total(&parts);
        if sum.width() <= tol {
            break;
        }
        let widest = (0..quads.len())
            .filter(|&i| !done[i] && quads[i].panels() < CORRECTED_CAP)
            .max_by(|&i, &j| parts[i].width().partial_cmp(&parts[j].width()).expect("finite"));
        let Some(i) = widest else { break };
        let before = parts[i].width();
        quads[i].refine();
        let (s, t) = pieces[i];
        parts[i] = padded(&quads[i], s, t).intersect(&parts[i]);
        // rounding floor reached on this piece
        done[i] = quads[i].panels() >= 64 && parts[i].width() > before * T::lit(0.75);
    }
    let n = quads.iter().map(|q| q.panels()).sum();
    Ok(Some((total(&parts), n)))
}

/// Jet of `F(x) = ∫_base^x f` at `x1`: value from the bracket midpoint,
/// slope `f(x1)`, and the continuity envelope of `f` at `x1` since
/// `F(x1+ε) − F(x1) − f(x1)ε = ∫_0^ε (f(x1+t) − f(x1)) dt`. The
/// coefficient is widened by the bracket width.
pub fn ftc_jet<T: Real, I: Integrand<T>>(f: &I, base: T, x1: T, tol: T, cont: &Jet0<T>) -> Result<Jet1<T>> {
    if cont.x0 != x1 {
        return Err(Error::BasePointMismatch { left: cont.x0.f64(), right: x1.f64() });
    }
    let big = integrate(f, base, x1, tol)?;
    let env = if cont.env.is_zero() {
        ErrorEnvelope::zero(cont.env.radius())
    } else {
        ErrorEnvelope::linear(cont.env.coeff() + big.width(), cont.env.radius())
    };
    Ok(Jet1 { x0: x1, value: big.mid(), slope: cont.value, env })
}

/// [`ftc_jet`] for an expression, with the continuity envelope taken from
/// its first-order jet.
pub fn ftc_jet_expr<T: Real>(engine: &Engine<'_, T>, e: &Expr, base: T, x1: T) -> Result<Jet1<T>> {
    let cont = engine.jet(e, x1)?.continuity();
    ftc_jet(&ExprIntegrand::new(engine, e), base, x1, engine.tol(), &cont)
}

/// Steps `±2^-k·span` for `k = 2..=20`.
pub fn ftc_grid<T: Real>(span: T) -> Vec<T> {
    let span = if span == T::zero() { T::one() } else { span.abs() };
    (2..=20).flat_map(|k| {
        let e = span * T::lit(2f64.powi(-k));
        [e, -e]
    })
    .collect()
}

/// Check `|∫_{x1}^{x1+ε} f − f(x1)ε| ≤ |ε|·bound(ε)` on [`ftc_grid`] within
/// the envelope radius, allowing each bracket's width.
pub fn check_ftc<T: Real, I: Integrand<T>>(f: &I, jet: &Jet1<T>, span: T, tol: T) -> Result<Certification<T>> {
    let k = slack::<T>();
    let eps: Vec<T> = ftc_grid(span).into_iter().filter(|e| e.abs() <= jet.env.radius()).collect();
    let rows: Vec<(T, T, T)> = eps
        .par_iter()
        .map(|&e| {
            let x = jet.x0 + e;
            let eff = x - jet.x0;
            let piece = integrate(f, jet.x0, x, tol * eff.abs())?;
            let res = piece.mid() - jet.slope * eff;
            let allowed = eff.abs() * jet.env.bound(eff) * k + piece.width() + f.noise(jet.slope) * eff.abs();
            Ok((eff, res, allowed))
        })
        .collect::<Result<_>>()?;
    for (i, &(e, res, allowed)) in rows.iter().enumerate() {
        if res.abs() > allowed {
            return Ok(Certification { checked: i + 1, witness: Some(Witness { eps: e, observed: res.abs(), bound: allowed }) });
        }
    }
    Ok(Certification { checked: rows.len(), witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geomfun::geometry;

    #[test]
    fn constant_is_exact() {
        let f = FnIntegrand(|_x: f64| Ok(3.0));
        let b = integrate(&f, 1.0, 2.5, 1e-9).unwrap();
        assert!((b.lo - 4.5).abs() < 1e-13 && b.width() < 1e-13, "{b:?}");
    }

    #[test]
    fn reciprocal_gives_ln2() {
        let en = Engine::new(geometry(), 1e-9);
        let e = parse("1/x").unwrap();
        let b = integrate(&ExprIntegrand::new(&en, &e), 1.0, 2.0, 1e-9).unwrap();
        assert!(b.contains(std::f64::consts::LN_2) && b.width() <= 1e-9 && b.rigorous, "{b:?}");
        let r = integrate(&ExprIntegrand::new(&en, &e), 2.0, 1.0, 1e-9).unwrap();
        assert_eq!((r.lo, r.hi), (-b.hi, -b.lo));
    }

    #[test]
    fn rectangles_halve() {
        let f = FnIntegrand(|x: f64| Ok(1.0 / x));
        let mut prev = rectangle_bracket(&f, 1.0, 2.0, 8).unwrap().width();
        for n in [16, 32, 64, 128] {
            let w = rectangle_bracket(&f, 1.0, 2.0, n).unwrap().width();
            assert!(prev / w > 1.9 && prev / w < 2.1, "{prev} {w}");
            prev = w;
        }
    }

    #[test]
    fn non_monotone_integrand() {
        let en = Engine::new(geometry(), 1e-9);
        let e = parse("sin(x)").unwrap();
        let pi = std::f64::consts::PI;
        let b = integrate(&ExprIntegrand::new(&en, &e), 0.0, 2.0 * pi, 1e-9).unwrap();
        assert!(b.contains(0.0) || b.mid().abs() < 1e-9, "{b:?}");
        let b = integrate(&ExprIntegrand::new(&en, &e), 0.0, pi, 1e-9).unwrap();
        assert!((b.mid() - 2.0).abs() < 2e-9, "{b:?}");
    }

    #[test]
    fn guessed_segmentation_is_flagged() {
        let f = FnIntegrand(|x: f64| Ok((x - 0.3) * (x - 0.3)));
        let b = integrate(&f, 0.0, 1.0, 1e-3).unwrap();
        assert!(!b.rigorous && b.contains(0.3f64.powi(3) / 3.0 + 0.7f64.powi(3) / 3.0), "{b:?}");
    }

    #[test]
    fn ftc_of_cosine_at_zero() {
        let en = Engine::new(geometry(), 1e-9);
        let e = parse("cos(x)").unwrap();
        let j = ftc_jet_expr(&en, &e, 0.0, 0.0).unwrap();
        assert_eq!((j.value, j.slope), (0.0, 1.0));
        let cert = check_ftc(&ExprIntegrand::new(&en, &e), &j, 1.0, 1e-9).unwrap();
        assert!(cert.pass(), "{cert:?}");
    }

    #[test]
    fn ftc_of_reciprocal() {
        let en = Engine::new(geometry(), 1e-9);
        let e = parse("1/x").unwrap();
        let j = ftc_jet_expr(&en, &e, 1.0, 2.0).unwrap();
        assert!((j.value - std::f64::consts::LN_2).abs() < 1e-9 && j.slope == 0.5, "{j:?}");
        let cert = check_ftc(&ExprIntegrand::new(&en, &e), &j, 1.0, 1e-9).unwrap();
        assert!(cert.pass(), "{cert:?}");
    }
}
