//! Error envelopes: certified bounds `|E(ε)| ≤ C·|ε|^p` on `|ε| ≤ r`, the
//! closure algebra over them, and grid certification.
//!
//! An error function `E` must satisfy `E(0) = 0`, be defined for all small
//! `ε`, and become as small as desired when `ε` shrinks. The analytic normal
//! form makes the last property executable. Arbitrary functions enter as
//! [`ErrorEnvelope::empirical`] samplers and become usable by the algebra
//! once a dominating analytic bound has been certified on the grid.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Raw access to an error function.
pub type Sampler<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Points on each side of zero in the certification grid.
pub const GRID_HALF: usize = 2048;
/// The grid reaches down to `r·2^-GRID_DEPTH`.
pub const GRID_DEPTH: i32 = 40;

/// Relative slack on every grid comparison.
pub fn slack<T: Real>() -> T {
    T::one() + T::lit(2f64.powi(-20))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Analytic,
    Empirical,
}

/// Certified error function.
#[derive(Clone)]
pub struct ErrorEnvelope<T> {
    c: T,
    p: T,
    r: T,
    sampler: Option<Sampler<T>>,
    dominated: bool,
}

impl<T: Real> fmt::Debug for ErrorEnvelope<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErrorEnvelope")
            .field("kind", &self.kind())
            .field("c", &self.c)
            .field("p", &self.p)
            .field("r", &self.r)
            .finish()
    }
}

impl<T: Real> PartialEq for ErrorEnvelope<T> {
    fn eq(&self, other: &Self) -> bool {
        self.kind() == other.kind() && self.c == other.c && self.p == other.p && self.r == other.r
    }
}

impl<T: Real> ErrorEnvelope<T> {
    /// `C·|ε|^p` on `|ε| ≤ r`.
    pub fn analytic(c: T, p: T, r: T) -> Result<Self> {
        if !(c >= T::zero()) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("envelope coefficient must be finite and >= 0, got {c}")));
        }
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!("envelope power must be positive, got {p}")));
        }
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("envelope radius must be positive, got {r}")));
        }
        Ok(Self { c, p, r, sampler: None, dominated: true })
    }

    pub fn zero(r: T) -> Self {
        Self { c: T::zero(), p: T::one(), r, sampler: None, dominated: true }
    }

    /// `k·|ε|` on `|ε| ≤ r`.
    pub fn linear(k: T, r: T) -> Self {
        Self { c: k.abs(), p: T::one(), r, sampler: None, dominated: true }
    }

    /// Sampled error function without a certified bound yet.
    pub fn empirical(sampler: Sampler<T>, r: T) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("envelope radius must be positive, got {r}")));
        }
        Ok(Self { c: T::infinity(), p: T::one(), r, sampler: Some(sampler), dominated: false })
    }

    /// Attach a dominating `C·|ε|^p` to an empirical envelope, certified on
    /// the grid. `floor` is an absolute allowance for evaluation noise.
    pub fn with_dominator(self, c: T, p: T, floor: T) -> Result<Self> {
        self.with_dominator_by(c, p, |_| floor)
    }

    /// [`with_dominator`](Self::with_dominator) with a noise allowance that
    /// depends on `ε`.
    pub fn with_dominator_by<N>(mut self, c: T, p: T, floor: N) -> Result<Self>
    where
        N: Fn(T) -> T + Sync,
    {
        let bound = Self::analytic(c, p, self.r)?;
        let s = self
            .sampler
            .clone()
            .ok_or_else(|| Error::InvalidArgument("only empirical envelopes take a dominator".into()))?;
        let cert = bound.certify_by(|e| s(e), floor)?;
        if let Some(w) = cert.witness {
            return Err(Error::CertificationFailed { eps: w.eps.f64(), observed: w.observed.f64(), bound: w.bound.f64() });
        }
        self.c = c;
        self.p = p;
        self.dominated = true;
        Ok(self)
    }

    pub fn kind(&self) -> Kind {
        if self.sampler.is_some() {
            Kind::Empirical
        } else {
            Kind::Analytic
        }
    }

    pub fn coeff(&self) -> T {
        self.c
    }

    pub fn power(&self) -> T {
        self.p
    }

    pub fn radius(&self) -> T {
        self.r
    }

    pub fn sampler(&self) -> Option<&Sampler<T>> {
        self.sampler.as_ref()
    }

    /// True when an analytic bound is available.
    pub fn is_dominated(&self) -> bool {
        self.dominated
    }

    pub fn is_zero(&self) -> bool {
        self.dominated && self.c == T::zero()
    }

    /// `C·|ε|^p`, or `|E(ε)|` for an undominated empirical envelope.
    pub fn bound(&self, eps: T) -> T {
        if !self.dominated {
            return self.sampler.as_ref().map_or(T::infinity(), |s| s(eps).abs());
        }
        if self.c == T::zero() || eps == T::zero() {
            return T::zero();
        }
        self.c * eps.abs().powf(self.p)
    }

    /// The analytic part alone, dropping any sampler.
    pub fn dominator(&self) -> Result<Self> {
        if !self.dominated {
            return Err(Error::CertificationRequired("empirical envelope has no certified dominator".into()));
        }
        Ok(Self { c: self.c, p: self.p, r: self.r, sampler: None, dominated: true })
    }

    /// Same envelope on a smaller radius.
    pub fn restricted(&self, r: T) -> Self {
        let mut e = self.clone();
        e.r = r.min(self.r);
        e
    }

    pub fn to_json(&self) -> Value {
        let kind = match self.kind() {
            Kind::Analytic => "analytic",
            Kind::Empirical => "empirical",
        };
        json!({ "C": self.c.f64(), "p": self.p.f64(), "r": self.r.f64(), "kind": kind })
    }

    /// Grid check of `|g(ε)| ≤ bound(ε)·(1 + 2^-20) + floor`.
    ///
    /// A non-finite sample is an error. `g(0)` must vanish exactly.
    pub fn certify<G>(&self, g: G, floor: T) -> Result<Certification<T>>
    where
        G: Fn(T) -> T + Sync,
    {
        self.certify_by(g, |_| floor)
    }

    /// [`certify`](Self::certify) with an allowance `floor(ε)`.
    pub fn certify_by<G, N>(&self, g: G, floor: N) -> Result<Certification<T>>
    where
        G: Fn(T) -> T + Sync,
        N: Fn(T) -> T + Sync,
    {
        let grid = certification_grid(self.r);
        let k = slack::<T>();
        let checked: Vec<(T, T, T)> = grid
            .par_iter()
            .map(|&e| {
                let v = g(e);
                (e, v, self.bound(e))
            })
            .collect();
        for &(e, v, b) in &checked {
            if !v.is_finite() {
                return Err(Error::SamplerFailure { eps: e.f64() });
            }
            let allowed = if e == T::zero() { T::zero() } else { b * k + floor(e) };
            if v.abs() > allowed {
                return Ok(Certification { checked: checked.len(), witness: Some(Witness { eps: e, observed: v.abs(), bound: allowed }) });
            }
        }
        Ok(Certification { checked: checked.len(), witness: None })
    }
}

/// First grid point where a certification failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T> {
    pub eps: T,
    pub observed: T,
    pub bound: T,
}

/// Outcome of a grid certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certification<T> {
    pub checked: usize,
    pub witness: Option<Witness<T>>,
}

impl<T: Real> Certification<T> {
    pub fn pass(&self) -> bool {
        self.witness.is_none()
    }
}

/// 4097 points: `±r·q^k` for `k = 0..2048` with `q^2047 = 2^-40`, and `0`.
/// Ordered from `-r` to `r`.
pub fn certification_grid<T: Real>(r: T) -> Vec<T> {
    let q = 2f64.powf(-(GRID_DEPTH as f64) / (GRID_HALF - 1) as f64);
    let pos: Vec<T> = (0..GRID_HALF).map(|k| r * T::lit(q.powi(k as i32))).collect();
    let mut g = Vec::with_capacity(2 * GRID_HALF + 1);
    g.extend(pos.iter().map(|&e| -e));
    g.push(T::zero());
    g.extend(pos.iter().rev().copied());
    g
}

/// One-sided geometric grid `r·2^-k`, `k = 0..=40`.
pub fn one_sided_grid<T: Real>(r: T) -> Vec<T> {
    (0..=GRID_DEPTH).map(|k| r * T::lit(2f64.powi(-k))).collect()
}

fn need_bound<T: Real>(e: &ErrorEnvelope<T>, op: &str) -> Result<()> {
    if e.dominated {
        Ok(())
    } else {
        Err(Error::CertificationRequired(format!("{op} needs an analytic bound; certify the empirical envelope first")))
    }
}

/// Sum or difference of two error functions.
pub fn env_sum<T: Real>(a: &ErrorEnvelope<T>, b: &ErrorEnvelope<T>) -> Result<ErrorEnvelope<T>> {
    need_bound(a, "env_sum")?;
    need_bound(b, "env_sum")?;
    let r = a.r.min(b.r).min(T::one());
    match (a.c == T::zero(), b.c == T::zero()) {
        (true, true) => Ok(ErrorEnvelope::zero(r)),
        (true, false) => ErrorEnvelope::analytic(b.c, b.p, r),
        (false, true) => ErrorEnvelope::analytic(a.c, a.p, r),
        (false, false) => ErrorEnvelope::analytic(a.c + b.c, a.p.min(b.p), r),
    }
}

/// Sum of several envelopes.
pub fn env_sum_all<T: Real>(parts: &[ErrorEnvelope<T>]) -> Result<ErrorEnvelope<T>> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty envelope sum".into()))?;
    rest.iter().try_fold(first.dominator()?, |acc, e| env_sum(&acc, e))
}

/// Error function times a function bounded by `m` on the radius.
pub fn env_scale_bounded<T: Real>(a: &ErrorEnvelope<T>, m: T) -> Result<ErrorEnvelope<T>> {
    if !(m >= T::zero()) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("sup bound must be finite and >= 0, got {m}")));
    }
    need_bound(a, "env_scale_bounded")?;
    if m == T::zero() || a.c == T::zero() {
        return Ok(ErrorEnvelope::zero(a.r));
    }
    ErrorEnvelope::analytic(a.c * m, a.p, a.r)
}

/// `E_outer(E_inner(ε))`. The inner radius shrinks until its range fits
/// in the outer radius.
pub fn env_compose<T: Real>(outer: &ErrorEnvelope<T>, inner: &ErrorEnvelope<T>) -> Result<ErrorEnvelope<T>> {
    if !inner.dominated {
        return Err(Error::CertificationRequired(
            "empirical inner envelope has no certified dominator to bound its range".into(),
        ));
    }
    need_bound(outer, "env_compose")?;
    let mut r = inner.r.min(T::one());
    if inner.c == T::zero() || outer.c == T::zero() {
        return Ok(ErrorEnvelope::zero(r));
    }
    let reach = (outer.r / inner.c).powf(T::one() / inner.p);
    if reach < r {
        r = reach;
    }
    // guard against rounding in the power
    while inner.c * r.powf(inner.p) > outer.r {
        r = r * T::lit(0.999_999);
    }
    if !(r > T::zero()) {
        return Err(Error::CertificationRequired("inner radius cannot be shrunk into the outer radius".into()));
    }
    ErrorEnvelope::analytic(outer.c * inner.c.powf(outer.p), outer.p * inner.p, r)
}

/// Does `big` dominate the sampled function on the grid of its radius?
pub fn env_dominates<T, G>(big: &ErrorEnvelope<T>, small: G) -> Result<bool>
where
    T: Real,
    G: Fn(T) -> T + Sync,
{
    Ok(big.certify(small, T::zero())?.pass())
}

/// Tolerance rectangle `[x_lo, x_hi] × [y_lo, y_hi]` containing the graph of
/// `E` over its width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunnelBox<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub y_lo: T,
    pub y_hi: T,
}

impl<T: Real> FunnelBox<T> {
    pub fn to_json(&self) -> Value {
        json!({ "x_lo": self.x_lo.f64(), "x_hi": self.x_hi.f64(), "y_lo": self.y_lo.f64(), "y_hi": self.y_hi.f64() })
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.x_lo <= other.x_lo && other.x_hi <= self.x_hi && self.y_lo <= other.y_lo && other.y_hi <= self.y_hi
    }
}

/// Nested boxes of heights `y0·2^-k`. Widths come from the analytic bound
/// (`(y/C)^(1/p)`) or, for an undominated sampler, from the largest grid
/// radius over which every sample stays below the height. Each box is
/// checked against the samples when a sampler is present; `floor` absorbs
/// evaluation noise.
pub fn funnel_boxes<T: Real>(e: &ErrorEnvelope<T>, n_boxes: usize, y0: T, floor: T) -> Result<Vec<FunnelBox<T>>> {
    funnel_boxes_by(e, n_boxes, y0, |_| floor)
}

/// [`funnel_boxes`] with a noise allowance that depends on `ε`, for samplers
/// whose error grows like `δ/|ε|`.
pub fn funnel_boxes_by<T, N>(e: &ErrorEnvelope<T>, n_boxes: usize, y0: T, floor: N) -> Result<Vec<FunnelBox<T>>>
where
    T: Real,
    N: Fn(T) -> T + Sync,
{
    if n_boxes == 0 {
        return Err(Error::InvalidArgument("need at least one box".into()));
    }
    if !(y0 > T::zero()) || !y0.is_finite() {
        return Err(Error::InvalidArgument(format!("initial tolerance must be positive, got {y0}")));
    }
    let grid = certification_grid(e.r);
    let samples: Option<Vec<(T, T)>> = e.sampler.as_ref().map(|s| grid.par_iter().map(|&x| (x, s(x))).collect());
    if let Some(ss) = &samples {
        for &(x, v) in ss {
            if !v.is_finite() {
                return Err(Error::SamplerFailure { eps: x.f64() });
            }
        }
    }
    // prefix maximum of |E| by increasing |ε| (grid is symmetric)
    let prefix: Option<Vec<(T, T)>> = samples.as_ref().map(|ss| {
        let mid = GRID_HALF;
        let mut acc = ss[mid].1.abs();
        let mut out = vec![(T::zero(), acc)];
        for k in 1..=GRID_HALF {
            acc = acc.max(ss[mid - k].1.abs()).max(ss[mid + k].1.abs());
            out.push((ss[mid + k].0, acc));
        }
        out
    });
    let mut boxes = Vec::with_capacity(n_boxes);
    let mut y = y0;
    for _ in 0..n_boxes {
        let width = if e.dominated {
            if e.c == T::zero() {
                e.r
            } else {
                (y / e.c).powf(T::one() / e.p).min(e.r)
            }
        } else {
            let pre = prefix.as_ref().expect("undominated envelopes carry a sampler");
            pre.iter().take_while(|(_, m)| *m <= y).last().map_or(T::zero(), |(x, _)| *x)
        };
        if !(width > T::zero()) {
            return Err(Error::CertificationFailed { eps: 0.0, observed: y.f64(), bound: y.f64() });
        }
        let b = FunnelBox { x_lo: -width, x_hi: width, y_lo: -y, y_hi: y };
        if let Some(ss) = &samples {
            let k = slack::<T>();
            for &(x, v) in ss {
                let allowed = y * k + if x == T::zero() { T::zero() } else { floor(x) };
                if x.abs() <= width && v.abs() > allowed {
                    return Err(Error::CertificationFailed { eps: x.f64(), observed: v.f64(), bound: y.f64() });
                }
            }
        }
        boxes.push(b);
        y = y * T::half();
    }
    Ok(boxes)
}

/// Least-squares fit of `log|res|` against `log|ε|` over the points above
/// `floor`, giving the power; the coefficient is `1.1·max |res|/|ε|^p`.
/// Returns `(C, p, raw C)`; with no signal the result is `(0, 1, 0)`.
pub fn fit_dominator<T: Real>(samples: &[(T, T)], floor: T) -> (T, T, T) {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(e, v)| *e != T::zero() && v.abs() > floor && v.is_finite())
        .map(|(e, v)| (e.abs().f64().ln(), v.abs().f64().ln()))
        .collect();
    if pts.is_empty() {
        return (T::zero(), T::one(), T::zero());
    }
    let p = if pts.len() < 2 {
        1.0
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            1.0
        }
    };
    let pt = T::lit(p);
    let raw = raw_coeff(samples, floor, pt);
    (raw * T::lit(1.1), pt, raw)
}

/// `max |res|/|ε|^p` over the points above `floor`.
pub fn raw_coeff<T: Real>(samples: &[(T, T)], floor: T, p: T) -> T {
    samples
        .iter()
        .filter(|(e, v)| *e != T::zero() && v.abs() > floor)
        .map(|(e, v)| v.abs() / e.abs().powf(p))
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn an(c: f64, p: f64, r: f64) -> ErrorEnvelope<f64> {
        ErrorEnvelope::analytic(c, p, r).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = certification_grid(1.0f64);
        assert_eq!(g.len(), 4097);
        assert_eq!(g[2048], 0.0);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[4096], 1.0);
        assert!((g[2049] / 2f64.powi(-40) - 1.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sum_rules() {
        let s = env_sum(&an(1.0, 1.0, 1.0), &an(2.0, 1.0, 1.0)).unwrap();
        assert_eq!((s.coeff(), s.power(), s.radius()), (3.0, 1.0, 1.0));
        let s = env_sum(&an(1.0, 2.0, 1.0), &an(1.0, 1.0, 1.0)).unwrap();
        assert_eq!((s.coeff(), s.power()), (2.0, 1.0));
        let e = an(1.5, 0.5, 3.0);
        let s = env_sum(&e, &ErrorEnvelope::zero(2.0)).unwrap();
        assert_eq!((s.coeff(), s.power(), s.radius()), (1.5, 0.5, 1.0));
    }

    #[test]
    fn scale_rules() {
        let s = env_scale_bounded(&an(1.0, 1.0, 1.0), 3.0).unwrap();
        assert_eq!(s.coeff(), 3.0);
        assert!(env_scale_bounded(&an(2.0, 0.5, 0.25), 0.0).unwrap().is_zero());
        assert!(env_scale_bounded(&an(1.0, 1.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn compose_rules() {
        let c = env_compose(&an(1.0, 1.0, 1.0), &an(1.0, 1.0, 1.0)).unwrap();
        assert_eq!((c.coeff(), c.power(), c.radius()), (1.0, 1.0, 1.0));
        let c = env_compose(&an(1.0, 2.0, 1.0), &an(2.0, 1.0, 0.1)).unwrap();
        assert_eq!((c.coeff(), c.power()), (4.0, 2.0));
        assert!(env_compose(&an(3.0, 1.0, 1.0), &ErrorEnvelope::zero(1.0)).unwrap().is_zero());
        // range of the inner envelope must fit the outer radius
        let c = env_compose(&an(1.0, 1.0, 0.1), &an(2.0, 1.0, 1.0)).unwrap();
        assert!(2.0 * c.radius() <= 0.1);
    }

    #[test]
    fn empirical_inner_is_rejected() {
        let s: Sampler<f64> = Arc::new(|e| e * e);
        let emp = ErrorEnvelope::empirical(s, 1.0).unwrap();
        assert!(matches!(env_compose(&an(1.0, 1.0, 1.0), &emp), Err(Error::CertificationRequired(_))));
        let dom = emp.with_dominator(1.0, 2.0, 0.0).unwrap();
        assert!(env_compose(&an(1.0, 1.0, 1.0), &dom).is_ok());
    }

    #[test]
    fn domination() {
        assert!(env_dominates(&an(1.0, 1.0, 1.0), |e: f64| e * e).unwrap());
        assert!(!env_dominates(&an(1.0, 2.0, 1.0), |e: f64| e.abs().sqrt()).unwrap());
        assert!(env_dominates(&an(0.5, 3.0, 1.0), |_| 0.0).unwrap());
        assert!(matches!(env_dominates(&an(1.0, 1.0, 1.0), |e: f64| if e > 0.5 { f64::NAN } else { 0.0 }), Err(Error::SamplerFailure { .. })));
        // E(0) must vanish exactly
        assert!(!env_dominates(&an(1.0, 1.0, 1.0), |_| 1e-300).unwrap());
    }

    #[test]
    fn funnel_widths_for_square() {
        let s: Sampler<f64> = Arc::new(|e| e * e);
        let e = ErrorEnvelope::empirical(s, 1.0).unwrap().with_dominator(1.0, 2.0, 0.0).unwrap();
        let b = funnel_boxes(&e, 3, 0.25, 0.0).unwrap();
        let w: Vec<f64> = b.iter().map(|b| b.x_hi).collect();
        assert!((w[0] - 0.5).abs() < 1e-15);
        assert!((w[1] - 0.125f64.sqrt()).abs() < 1e-15);
        assert!((w[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn funnel_for_zero_envelope_is_full_width() {
        let b = funnel_boxes(&ErrorEnvelope::zero(0.5f64), 4, 1.0, 0.0).unwrap();
        assert!(b.iter().all(|b| b.x_hi == 0.5 && b.x_lo == -0.5));
    }

    #[test]
    fn funnel_for_sampled_envelope() {
        let s: Sampler<f64> = Arc::new(|e| e.abs().powi(3));
        let e = ErrorEnvelope::empirical(s, 1.0).unwrap();
        let b = funnel_boxes(&e, 5, 0.5, 0.0).unwrap();
        assert!(b.windows(2).all(|w| w[0].x_hi > w[1].x_hi && w[0].contains(&w[1])));
    }

    #[test]
    fn fit_recovers_power_law() {
        let samples: Vec<(f64, f64)> = one_sided_grid(1.0).into_iter().map(|e| (e, 3.0 * e * e)).collect();
        let (c, p, raw) = fit_dominator(&samples, 0.0);
        assert!((p - 2.0).abs() < 1e-9);
        assert!((raw - 3.0).abs() < 1e-6);
        assert!((c - 3.3).abs() < 1e-6);
    }
}
