//! Evaluation of expressions as values, first-order jets and Taylor jets.
//!
//! Transcendental leaves go through the area-defined functions; powers use
//! the monomial and rational-power rules.

use std::sync::Arc;

use super::{Expr, Func};
use crate::envelope::{certification_grid, funnel_boxes_by, ErrorEnvelope, FunnelBox, Sampler};
use crate::error::{Error, Result};
use crate::geomfun::Geometry;
use crate::jet::{abs_jet, Jet1};
use crate::scalar::{nth_root, powi, powu, Real};
use crate::taylor::{abs_sum, fit_remainder, series, TaylorJet};

/// Evaluator bound to a geometry and a function tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Engine<'g, T: Real> {
    geo: &'g Geometry<T>,
    tol: T,
}

fn at_node(err: Error, node: &Expr) -> Error {
    let tag = |m: String| if m.contains(" in `") { m } else { format!("{m} in `{node}`") };
    match err {
        Error::Domain(m) => Error::Domain(tag(m)),
        Error::DivisionDomain(m) => Error::DivisionDomain(tag(m)),
        e => e,
    }
}

fn exponent_parts<T: Real>(q: &num_rational::Ratio<i64>) -> Result<(i64, u32)> {
    let den = u32::try_from(*q.denom()).map_err(|_| Error::InvalidArgument(format!("exponent denominator too large: {q}")))?;
    let num = *q.numer();
    if num.unsigned_abs() > u32::MAX as u64 {
        return Err(Error::InvalidArgument(format!("exponent numerator too large: {q}")));
    }
    Ok((num, den))
}

impl<'g, T: Real> Engine<'g, T> {
    pub fn new(geo: &'g Geometry<T>, tol: T) -> Self {
        Self { geo, tol }
    }

    pub fn geometry(&self) -> &'g Geometry<T> {
        self.geo
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn with_tol(&self, tol: T) -> Self {
        Self { geo: self.geo, tol }
    }

    /// Tighter tolerance for sampling residuals.
    pub fn sample_tol(&self) -> T {
        (self.tol * T::lit(1e-3)).max(T::lit(16.0) * T::epsilon())
    }

    /// Engine at [`Self::sample_tol`].
    pub fn sampler(&self) -> Self {
        self.with_tol(self.sample_tol())
    }

    pub fn value(&self, e: &Expr, x: T) -> Result<T> {
        self.value_inner(e, x).map_err(|err| at_node(err, e))
    }

    fn value_inner(&self, e: &Expr, x: T) -> Result<T> {
        let g = self.geo;
        let tol = self.tol;
        Ok(match e {
            Expr::Const(c) => T::lit(*c),
            Expr::Var => x,
            Expr::Neg(a) => -self.value(a, x)?,
            Expr::Add(a, b) => self.value(a, x)? + self.value(b, x)?,
            Expr::Sub(a, b) => self.value(a, x)? - self.value(b, x)?,
            Expr::Mul(a, b) => self.value(a, x)? * self.value(b, x)?,
            Expr::Div(a, b) => {
                let (u, v) = (self.value(a, x)?, self.value(b, x)?);
                if v == T::zero() {
                    return Err(Error::DivisionDomain("division by zero".into()));
                }
                u * (T::one() / v)
            }
            Expr::Pow(a, q) => {
                let u = self.value(a, x)?;
                let (m, n) = exponent_parts::<T>(q)?;
                if n == 1 {
                    if m < 0 && u == T::zero() {
                        return Err(Error::DivisionDomain("negative power of zero".into()));
                    }
                    powi(u, m)
                } else {
                    if !(u > T::zero()) {
                        return Err(Error::Domain(format!("rational power of non-positive base {u}")));
                    }
                    powi(nth_root(u, n), m)
                }
            }
            Expr::Call(f, a) => {
                let u = self.value(a, x)?;
                match f {
                    Func::Sin => g.cos_sin(u, tol)?.1,
                    Func::Cos => g.cos_sin(u, tol)?.0,
                    Func::Sinh => g.cosh_sinh(u, tol)?.1,
                    Func::Cosh => g.cosh_sinh(u, tol)?.0,
                    Func::Exp => g.exp(u, tol)?,
                    Func::Ln => {
                        if !(u > T::zero()) {
                            return Err(Error::Domain(format!("ln of non-positive {u}")));
                        }
                        g.ln(u, tol)?
                    }
                    Func::Sqrt => {
                        if u < T::zero() {
                            return Err(Error::Domain(format!("sqrt of negative {u}")));
                        }
                        powi(nth_root(u, 2), 1)
                    }
                    Func::Abs => u.abs(),
                }
            }
        })
    }

    /// First-order jet by the derivative rules.
    pub fn jet(&self, e: &Expr, x0: T) -> Result<Jet1<T>> {
        self.jet_inner(e, x0).map_err(|err| at_node(err, e))
    }

    fn jet_inner(&self, e: &Expr, x0: T) -> Result<Jet1<T>> {
        let g = self.geo;
        let tol = self.tol;
        match e {
            Expr::Const(c) => Ok(Jet1::constant(T::lit(*c), x0)),
            Expr::Var => Ok(Jet1::var(x0)),
            Expr::Neg(a) => Ok(self.jet(a, x0)?.neg()),
            Expr::Add(a, b) => self.jet(a, x0)?.add(&self.jet(b, x0)?),
            Expr::Sub(a, b) => self.jet(a, x0)?.sub(&self.jet(b, x0)?),
            Expr::Mul(a, b) => self.jet(a, x0)?.mul(&self.jet(b, x0)?),
            Expr::Div(a, b) => self.jet(a, x0)?.div(&self.jet(b, x0)?),
            Expr::Pow(a, q) => {
                let inner = self.jet(a, x0)?;
                let y0 = inner.value;
                let (m, n) = exponent_parts::<T>(q)?;
                let outer = if n == 1 {
                    let mono = Jet1::monomial(m.unsigned_abs() as u32, y0);
                    if m < 0 {
                        mono.recip()?
                    } else {
                        mono
                    }
                } else {
                    Jet1::rational_power(m, n, y0)?
                };
                Jet1::chain(&outer, &inner)
            }
            Expr::Call(f, a) => {
                let inner = self.jet(a, x0)?;
                let y0 = inner.value;
                let outer = match f {
                    Func::Sin => g.sin_jet(y0, tol)?,
                    Func::Cos => g.cos_jet(y0, tol)?,
                    Func::Sinh => g.sinh_jet(y0, tol)?,
                    Func::Cosh => g.cosh_jet(y0, tol)?,
                    Func::Exp => g.exp_jet(y0, tol)?,
                    Func::Ln => g.ln_jet(y0, tol)?,
                    Func::Sqrt => Jet1::rational_power(1, 2, y0)?,
                    Func::Abs => abs_jet(y0)?,
                };
                Jet1::chain(&outer, &inner)
            }
        }
    }

    /// Taylor coefficients `c_0..=c_n` at `x0` by truncated-series arithmetic.
    pub fn series(&self, e: &Expr, x0: T, n: usize) -> Result<Vec<T>> {
        self.series_inner(e, x0, n).map_err(|err| at_node(err, e))
    }

    fn series_inner(&self, e: &Expr, x0: T, n: usize) -> Result<Vec<T>> {
        let g = self.geo;
        let tol = self.tol;
        let unit = |v: T| {
            let mut s = vec![T::zero(); n + 1];
            s[0] = v;
            s
        };
        match e {
            Expr::Const(c) => Ok(unit(T::lit(*c))),
            Expr::Var => {
                let mut s = unit(x0);
                if n >= 1 {
                    s[1] = T::one();
                }
                Ok(s)
            }
            Expr::Neg(a) => Ok(series::neg(&self.series(a, x0, n)?)),
            Expr::Add(a, b) => Ok(series::add(&self.series(a, x0, n)?, &self.series(b, x0, n)?)),
            Expr::Sub(a, b) => Ok(series::sub(&self.series(a, x0, n)?, &self.series(b, x0, n)?)),
            Expr::Mul(a, b) => Ok(series::mul(&self.series(a, x0, n)?, &self.series(b, x0, n)?)),
            Expr::Div(a, b) => series::div(&self.series(a, x0, n)?, &self.series(b, x0, n)?),
            Expr::Pow(a, q) => {
                let s = self.series(a, x0, n)?;
                let (m, den) = exponent_parts::<T>(q)?;
                if den == 1 {
                    let p = series::powu(&s, m.unsigned_abs());
                    if m < 0 {
                        series::div(&unit(T::one()), &p)
                    } else {
                        Ok(p)
                    }
                } else {
                    let c0 = s[0];
                    if !(c0 > T::zero()) {
                        return Err(Error::Domain(format!("rational power of non-positive base {c0}")));
                    }
                    let qt = T::lit(*q.numer() as f64) / T::lit(*q.denom() as f64);
                    let outer = series::binomial(powi(nth_root(c0, den), m), c0, qt, n);
                    series::compose(&outer, &s, c0)
                }
            }
            Expr::Call(f, a) => {
                let s = self.series(a, x0, n)?;
                let c0 = s[0];
                let outer = match f {
                    Func::Sin | Func::Cos => {
                        let (c, sn) = g.cos_sin(c0, tol)?;
                        if *f == Func::Sin {
                            series::from_cycle(&[sn, c, -sn, -c], n)
                        } else {
                            series::from_cycle(&[c, -sn, -c, sn], n)
                        }
                    }
                    Func::Sinh | Func::Cosh => {
                        let (c, sn) = g.cosh_sinh(c0, tol)?;
                        if *f == Func::Sinh {
                            series::from_cycle(&[sn, c], n)
                        } else {
                            series::from_cycle(&[c, sn], n)
                        }
                    }
                    Func::Exp => series::from_cycle(&[g.exp(c0, tol)?], n),
                    Func::Ln => {
                        if !(c0 > T::zero()) {
                            return Err(Error::Domain(format!("ln of non-positive {c0}")));
                        }
                        series::ln_tail(g.ln(c0, tol)?, c0, n)
                    }
                    Func::Sqrt => {
                        if !(c0 > T::zero()) {
                            return Err(Error::Domain(format!("sqrt has no expansion at {c0}")));
                        }
                        series::binomial(nth_root(c0, 2), c0, T::half(), n)
                    }
                    Func::Abs => {
                        if c0 == T::zero() {
                            return Err(Error::Domain("abs has no expansion at 0".into()));
                        }
                        let mut o = unit(c0.abs());
                        if n >= 1 {
                            o[1] = c0.signum();
                        }
                        o
                    }
                };
                series::compose(&outer, &s, c0)
            }
        }
    }

    /// Absolute noise allowance for residual checks of `e` around `x0`:
    /// twice the observed gap between the value at this tolerance and at the
    /// sampling tolerance, plus a per-node sampling allowance.
    pub fn noise_floor(&self, e: &Expr, x0: T, scale: T) -> Result<T> {
        let fine = self.sampler();
        let gap = (self.value(e, x0)? - fine.value(e, x0)?).abs();
        Ok(T::two() * gap + T::lit(16.0) * fine.eval_noise(e, scale))
    }

    /// Typical absolute error of [`Self::value`] for a result of size
    /// `scale`: the tolerance per area-defined leaf plus rounding per node.
    pub fn eval_noise(&self, e: &Expr, scale: T) -> T {
        let leaves = T::from_usize_(e.transcendentals());
        let nodes = T::from_usize_(e.size());
        T::lit(4.0) * (self.tol * leaves + T::lit(16.0) * T::epsilon() * nodes) * (T::one() + scale.abs())
    }

    /// Taylor jet of order `n ≥ 1` with a fitted and certified remainder.
    ///
    /// The remainder radius is the radius of the first-order jet, so the
    /// sampled neighbourhood stays inside the domain.
    pub fn tjet(&self, e: &Expr, x0: T, n: usize) -> Result<TaylorJet<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("Taylor order must be at least 1".into()));
        }
        let coeffs = self.series(e, x0, n)?;
        let r = self.jet(e, x0)?.env.radius().min(T::one());
        let fine = self.sampler();
        let mut tj = TaylorJet { x0, coeffs, env: ErrorEnvelope::zero(r) };
        let grid = certification_grid(r);
        let samples: Vec<(T, T)> = {
            use rayon::prelude::*;
            grid.par_iter()
                .map(|&d| {
                    let eff = (x0 + d) - x0;
                    Ok((eff, fine.value(e, x0 + d)? - tj.poly(eff)))
                })
                .collect::<Result<_>>()?
        };
        let scale = tj.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        let floor = self.noise_floor(e, x0, scale)? + T::lit(64.0) * T::epsilon() * abs_sum(&tj.coeffs, r);
        let noise = T::lit(64.0) * floor;
        if let Some((_, p)) = fit_remainder(&samples, n, noise) {
            // a non-positive fitted power means no shrinking remainder; keep a
            // positive one so the envelope stays valid and the check decides
            let p = p.max(T::lit(1e-3));
            let c = samples
                .iter()
                .filter(|(d, v)| *d != T::zero() && v.abs() > noise)
                .map(|(d, v)| v.abs() / powu(d.abs(), n as u32) / d.abs().powf(p))
                .fold(T::zero(), T::max);
            tj.env = ErrorEnvelope::analytic(c * T::lit(1.1), p, r)?;
        }
        let cert = tj.check_remainder(|x| fine.value(e, x), noise)?;
        if let Some(w) = cert.witness {
            return Err(Error::CertificationFailed { eps: w.eps.f64(), observed: w.observed.f64(), bound: w.bound.f64() });
        }
        Ok(tj)
    }

    /// Nested funnel boxes for the first-order remainder
    /// `E(ε) = (f(x0+ε) − f(x0) − f'(x0)ε)/|ε|`, with the jet envelope as
    /// the certified dominator. The default first height is the bound at
    /// the jet radius.
    pub fn funnel(&self, e: &Expr, x0: T, n_boxes: usize, y0: Option<T>) -> Result<Vec<FunnelBox<T>>>
    where
        'g: 'static,
    {
        let j = self.jet(e, x0)?;
        let fine = self.sampler();
        let v = fine.value(e, x0)?;
        let s = j.slope;
        let expr = e.clone();
        let sampler: Sampler<T> = Arc::new(move |d: T| {
            if d == T::zero() {
                return T::zero();
            }
            let eff = (x0 + d) - x0;
            fine.value(&expr, x0 + d).map_or(T::nan(), |fx| (fx - v - s * eff) / eff.abs())
        });
        // value noise turns into δ/|ε| after the division
        let delta = T::lit(32.0) * fine.eval_noise(e, v);
        let round = T::lit(4.0) * T::epsilon() * s.abs();
        let floor = move |d: T| delta / d.abs() + round;
        let (c, p, r) = (j.env.coeff(), j.env.power(), j.env.radius());
        let env = ErrorEnvelope::empirical(sampler, r)?.with_dominator_by(c, p, floor)?;
        let y0 = match y0 {
            Some(y) => y,
            None if c > T::zero() => c * r.powf(p),
            None => T::one(),
        };
        funnel_boxes_by(&env, n_boxes, y0, floor)
    }

    /// Check a jet's contract against this engine's sampler.
    pub fn check_jet(&self, e: &Expr, j: &Jet1<T>) -> Result<crate::envelope::Certification<T>> {
        let fine = self.sampler();
        let floor = self.noise_floor(e, j.x0, j.value)?;
        j.check_contract(|x| fine.value(e, x), floor)
    }
}
