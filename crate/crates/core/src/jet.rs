//! First-order jets `f(x0 + ε) = f(x0) + f'(x0)·ε + |ε|·E(ε)` and the
//! derivative rules, each producing the slope and a certified envelope.

use serde_json::{json, Value};

use crate::envelope::{
    certification_grid, env_compose, env_scale_bounded, env_sum, env_sum_all, slack, Certification, ErrorEnvelope, Witness,
};
use crate::error::{Error, Result};
use crate::geomfun::Geometry;
use crate::scalar::{nth_root, powi, powu, Real};

/// First-order approximation of `f` at `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1<T: Real> {
    pub x0: T,
    pub value: T,
    pub slope: T,
    pub env: ErrorEnvelope<T>,
}

/// Continuity: `|f(x0 + ε) − f(x0)| ≤ E(ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet0<T: Real> {
    pub x0: T,
    pub value: T,
    pub env: ErrorEnvelope<T>,
}

const MAX_HALVINGS: usize = 200;

fn same_base<T: Real>(a: T, b: T) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::BasePointMismatch { left: a.f64(), right: b.f64() })
    }
}

/// Halve `r` until `pred(r)` holds.
fn shrink_until<T: Real>(mut r: T, what: &str, pred: impl Fn(T) -> bool) -> Result<T> {
    for _ in 0..MAX_HALVINGS {
        if pred(r) {
            return Ok(r);
        }
        r = r * T::half();
    }
    Err(Error::CertificationRequired(format!("working radius collapsed while {what}")))
}

impl<T: Real> Jet1<T> {
    pub fn constant(c: T, x0: T) -> Self {
        Self { x0, value: c, slope: T::zero(), env: ErrorEnvelope::zero(T::one()) }
    }

    pub fn var(x0: T) -> Self {
        Self { x0, value: x0, slope: T::one(), env: ErrorEnvelope::zero(T::one()) }
    }

    /// `sup |f|` on the working radius from the jet's own contract.
    pub fn sup_bound(&self, r: T) -> T {
        self.value.abs() + self.slope.abs() * r + self.env.coeff() * r.powf(self.env.power())
    }

    /// `|f(x0+ε) − f(x0)| ≤ (|f'| + C·r^p)·|ε|` on the radius.
    pub fn continuity(&self) -> Jet0<T> {
        let r = self.env.radius();
        let k = self.slope.abs() + self.env.coeff() * r.powf(self.env.power());
        Jet0 { x0: self.x0, value: self.value, env: ErrorEnvelope::linear(k, r) }
    }

    pub fn neg(&self) -> Self {
        Self { x0: self.x0, value: -self.value, slope: -self.slope, env: self.env.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_base(self.x0, other.x0)?;
        Ok(Self {
            x0: self.x0,
            value: self.value + other.value,
            slope: self.slope + other.slope,
            env: env_sum(&self.env, &other.env)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_base(self.x0, other.x0)?;
        Ok(Self {
            x0: self.x0,
            value: self.value - other.value,
            slope: self.slope - other.slope,
            env: env_sum(&self.env, &other.env)?,
        })
    }

    /// Product rule. With `f = v_a + s_a ε + |ε|E_a` and likewise `g`,
    /// the residual over `|ε|` is `s_a s_b ε + E_a·g + (v_a + s_a ε)·E_b`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_base(self.x0, other.x0)?;
        let (a, b) = (self, other);
        let r = a.env.radius().min(b.env.radius()).min(T::one());
        let env = env_sum_all(&[
            ErrorEnvelope::linear(a.slope * b.slope, r),
            env_scale_bounded(&b.env, a.slope.abs() * r)?,
            env_scale_bounded(&a.env, b.sup_bound(r))?,
            env_scale_bounded(&b.env, a.value.abs())?,
        ])?;
        Ok(Self { x0: a.x0, value: a.value * b.value, slope: a.slope * b.value + a.value * b.slope, env })
    }

    /// `1/f`. The radius shrinks until `|f(x0+ε)| ≥ |f(x0)|/2`; then
    /// `1/f − 1/v + sε/v² = −|ε|E/v² + δ²/(v² f)` with `δ = f − v`.
    pub fn recip(&self) -> Result<Self> {
        let (v, s) = (self.value, self.slope);
        if v == T::zero() {
            return Err(Error::DivisionDomain(format!("reciprocal of a zero value at x = {}", self.x0)));
        }
        let (c, p) = (self.env.coeff(), self.env.power());
        let va = v.abs();
        let r = shrink_until(self.env.radius().min(T::one()), "bounding a denominator away from zero", |r| {
            s.abs() * r + c * r.powf(T::one() + p) <= va * T::half()
        })?;
        let e = self.env.restricted(r);
        let v3 = va * va * va;
        let env = env_sum_all(&[
            env_scale_bounded(&e, T::one() / (v * v))?,
            ErrorEnvelope::linear(T::two() * s * s / v3, r),
            env_scale_bounded(&e, r * (T::lit(4.0) * s.abs() + T::two() * c * r.powf(p)) / v3)?,
        ])?;
        Ok(Self { x0: self.x0, value: T::one() / v, slope: -s / (v * v), env })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.recip()?)
    }

    /// `outer ∘ inner`, with `outer` based at `inner.value`. Writing
    /// `ε̃ = g'ε + |ε|E_g`, the residual over `|ε|` is
    /// `f'·E_g + (|ε̃|/|ε|)·E_f(ε̃)` and `|ε̃| ≤ K|ε|`.
    pub fn chain(outer: &Self, inner: &Self) -> Result<Self> {
        let tol = T::lit(1e-12) * T::one().max(inner.value.abs());
        if (outer.x0 - inner.value).abs() > tol {
            return Err(Error::BasePointMismatch { left: outer.x0.f64(), right: inner.value.f64() });
        }
        let (gs, cg, pg) = (inner.slope, inner.env.coeff(), inner.env.power());
        let rf = outer.env.radius();
        let r = shrink_until(inner.env.radius().min(T::one()), "fitting the inner range into the outer radius", |r| {
            gs.abs() * r + cg * r.powf(T::one() + pg) <= rf
        })?;
        let k = gs.abs() + cg * r.powf(pg);
        let transported = env_compose(&outer.env, &ErrorEnvelope::linear(k, r))?;
        let env = env_sum(
            &env_scale_bounded(&inner.env.restricted(r), outer.slope.abs())?,
            &env_scale_bounded(&transported, k)?,
        )?;
        Ok(Self { x0: inner.x0, value: outer.value, slope: outer.slope * gs, env })
    }

    /// Jet of the inverse function at `f.value`, given the jet of `f` at
    /// `g(x) = f.x0`.
    pub fn inverse(f: &Self) -> Result<Self> {
        Self::inverse_on_branch(f, T::infinity())
    }

    /// [`Self::inverse`] where the inverse maps into `|ε| ≤ branch` around
    /// `f.x0` only.
    ///
    /// On `|ε| ≤ ρ` with `C_f ρ^p ≤ |f'|/2`, `|f(x0+ε) − f(x0)| ≥ |f'||ε|/2`,
    /// so an output step `η` comes from `|ε| ≤ 2|η|/|f'|` and the residual
    /// `−|ε|E_f(ε)/f'` is dominated through composition.
    pub fn inverse_on_branch(f: &Self, branch: T) -> Result<Self> {
        let s = f.slope;
        if s == T::zero() {
            return Err(Error::NotInvertible { at: f.x0.f64() });
        }
        let (c, p) = (f.env.coeff(), f.env.power());
        let mut rho = f.env.radius().min(branch);
        if c > T::zero() {
            rho = rho.min((s.abs() * T::half() / c).powf(T::one() / p));
            while c * rho.powf(p) > s.abs() * T::half() {
                rho = rho * T::lit(0.999_999);
            }
        }
        let rg = (rho * s.abs() * T::half()).min(T::one());
        if !(rg > T::zero()) {
            return Err(Error::CertificationRequired("inverse radius collapsed".into()));
        }
        let widened = env_compose(&f.env, &ErrorEnvelope::linear(T::two() / s.abs(), rg))?;
        let env = env_scale_bounded(&widened, T::two() / (s * s))?;
        Ok(Self { x0: f.value, value: f.x0, slope: T::one() / s, env: env.restricted(rg) })
    }

    /// `x^n` from the binomial expansion: the terms past the linear one are
    /// `ε²·Σ_{k≥2} C(n,k) x0^(n−k) ε^(k−2)`, bounded on `|ε| ≤ 1`.
    pub fn monomial(n: u32, x0: T) -> Self {
        if n == 0 {
            return Self::constant(T::one(), x0);
        }
        let nt = T::from_u32(n).unwrap();
        let value = powu(x0, n);
        let slope = nt * powu(x0, n - 1);
        let mut c = T::zero();
        let mut binom = nt; // C(n, 1)
        for k in 2..=n {
            binom = binom * T::from_u32(n - k + 1).unwrap() / T::from_u32(k).unwrap();
            c = c + binom * powu(x0.abs(), n - k);
        }
        let env = if n == 1 { ErrorEnvelope::zero(T::one()) } else { ErrorEnvelope::linear(c, T::one()) };
        Self { x0, value, slope, env }
    }

    /// `x^(m/n)` for `x0 > 0` by implicit differentiation: `y = x^(1/n)` is
    /// the inverse of `y^n`, then `y^m` by the chain rule.
    pub fn rational_power(m: i64, n: u32, x0: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("zero denominator in exponent".into()));
        }
        if !(x0 > T::zero()) {
            return Err(Error::Domain(format!("rational power of non-positive base {x0}")));
        }
        let root = if n == 1 {
            Self::var(x0)
        } else {
            let y0 = nth_root(x0, n);
            let mut j = Self::inverse_on_branch(&Self::monomial(n, y0), y0 * T::half())?;
            j.x0 = x0;
            j
        };
        let pow = match m {
            0 => return Ok(Self::constant(T::one(), x0)),
            1 => root,
            _ => {
                let outer = Self::monomial(m.unsigned_abs() as u32, root.value);
                Self::chain(&outer, &root)?
            }
        };
        let mut j = if m < 0 { pow.recip()? } else { pow };
        j.value = powi(nth_root(x0, n), m);
        Ok(j)
    }

    /// Grid check of the jet contract against an evaluator, over the
    /// envelope radius. `floor` absorbs evaluation noise in `f`.
    pub fn check_contract<F>(&self, f: F, floor: T) -> Result<Certification<T>>
    where
        F: Fn(T) -> Result<T> + Sync,
    {
        contract(self.env.radius(), floor, |e| {
            let x = self.x0 + e;
            let eff = x - self.x0;
            let fx = f(x)?;
            Ok((eff, fx - self.value - self.slope * eff, eff.abs() * self.env.bound(eff)))
        })
    }

    pub fn to_json(&self) -> Value {
        json!({ "x0": self.x0.f64(), "value": self.value.f64(), "slope": self.slope.f64(), "env": self.env.to_json() })
    }
}

impl<T: Real> Jet0<T> {
    pub fn check_contract<F>(&self, f: F, floor: T) -> Result<Certification<T>>
    where
        F: Fn(T) -> Result<T> + Sync,
    {
        contract(self.env.radius(), floor, |e| {
            let x = self.x0 + e;
            let eff = x - self.x0;
            Ok((eff, f(x)? - self.value, self.env.bound(eff)))
        })
    }
}

fn contract<T, G>(r: T, floor: T, g: G) -> Result<Certification<T>>
where
    T: Real,
    G: Fn(T) -> Result<(T, T, T)> + Sync,
{
    use rayon::prelude::*;
    let grid = certification_grid(r);
    let rows: Vec<Result<(T, T, T)>> = grid.par_iter().map(|&e| g(e)).collect();
    let k = slack::<T>();
    let mut checked = 0;
    for row in rows {
        let (e, res, bound) = row?;
        if !res.is_finite() {
            return Err(Error::SamplerFailure { eps: e.f64() });
        }
        checked += 1;
        let allowed = bound * k + floor;
        if res.abs() > allowed {
            return Ok(Certification { checked, witness: Some(Witness { eps: e, observed: res.abs(), bound: allowed }) });
        }
    }
    Ok(Certification { checked, witness: None })
}

/// Uniqueness of the slope: two certified jets of the same function must
/// satisfy `|s_a − s_b| ≤ bound_a(ε) + bound_b(ε)` for every `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniqueness<T> {
    pub pass: bool,
    pub witness: Option<T>,
}

pub fn check_uniqueness<T: Real>(a: &Jet1<T>, b: &Jet1<T>, eps: &[T]) -> Result<Uniqueness<T>> {
    same_base(a.x0, b.x0)?;
    let d = (a.slope - b.slope).abs();
    let round = T::lit(8.0) * T::epsilon() * a.slope.abs().max(b.slope.abs());
    let r = a.env.radius().min(b.env.radius());
    for &e in eps {
        if e == T::zero() || e.abs() > r {
            continue;
        }
        if d > a.env.bound(e) + b.env.bound(e) + round {
            return Ok(Uniqueness { pass: false, witness: Some(e) });
        }
    }
    Ok(Uniqueness { pass: true, witness: None })
}

/// Jets of the area-defined functions.
impl<T: Real> Geometry<T> {
    /// `sin(x0+ε) − sin x0 − cos x0·ε = sin x0 (cos ε − 1) + cos x0 (sin ε − ε)`,
    /// with `|sin ε − ε| ≤ |ε|(1 − cos ε)` and `1 − cos ε ≤ ε²`.
    pub fn sin_jet(&self, x0: T, tol: T) -> Result<Jet1<T>> {
        let (c, s) = self.cos_sin(x0, tol)?;
        let k = s.abs() + c.abs();
        Ok(Jet1 { x0, value: s, slope: c, env: ErrorEnvelope::linear(k, T::one()) })
    }

    pub fn cos_jet(&self, x0: T, tol: T) -> Result<Jet1<T>> {
        let (c, s) = self.cos_sin(x0, tol)?;
        let k = s.abs() + c.abs();
        Ok(Jet1 { x0, value: c, slope: -s, env: ErrorEnvelope::linear(k, T::one()) })
    }

    /// With `K = cosh 1`: `sinh ε ≤ K|ε|` and `cosh ε − 1 ≤ sinh²ε/2` give
    /// `cosh ε − 1 ≤ K²ε²/2` and `|sinh ε − ε| ≤ |ε|(cosh ε − 1)` on `|ε| ≤ 1`.
    pub fn sinh_jet(&self, x0: T, tol: T) -> Result<Jet1<T>> {
        let (c, s) = self.cosh_sinh(x0, tol)?;
        let k2 = self.cosh_one() * self.cosh_one() * T::half();
        Ok(Jet1 { x0, value: s, slope: c, env: ErrorEnvelope::linear(k2 * (s.abs() + c.abs()), T::one()) })
    }

    pub fn cosh_jet(&self, x0: T, tol: T) -> Result<Jet1<T>> {
        let (c, s) = self.cosh_sinh(x0, tol)?;
        let k2 = self.cosh_one() * self.cosh_one() * T::half();
        Ok(Jet1 { x0, value: c, slope: s, env: ErrorEnvelope::linear(k2 * (s.abs() + c.abs()), T::one()) })
    }

    /// `0 ≤ e^ε − 1 − ε ≤ (e^ε − 1)²/2` and `e^ε − 1 ≤ 2ε` for small `ε`,
    /// so the residual is at most `2e^x0·ε²` on `|ε| ≤ 1/2`.
    pub fn exp_jet(&self, x0: T, tol: T) -> Result<Jet1<T>> {
        let e = self.exp(x0, tol)?;
        Ok(Jet1 { x0, value: e, slope: e, env: ErrorEnvelope::linear(T::two() * e, T::half()) })
    }

    /// `ln` as the inverse of `exp`.
    pub fn ln_jet(&self, x0: T, tol: T) -> Result<Jet1<T>> {
        if !(x0 > T::zero()) {
            return Err(Error::Domain(format!("ln of non-positive {x0}")));
        }
        let y0 = self.ln(x0, tol)?;
        let mut j = Jet1::inverse(&self.exp_jet(y0, tol)?)?;
        j.x0 = x0;
        Ok(j)
    }
}

/// `|x|` away from zero.
pub fn abs_jet<T: Real>(x0: T) -> Result<Jet1<T>> {
    if x0 == T::zero() {
        return Err(Error::Domain("abs is not differentiable at 0".into()));
    }
    let sign = x0.signum();
    Ok(Jet1 { x0, value: x0.abs(), slope: sign, env: ErrorEnvelope::zero(x0.abs().min(T::one())) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomfun::geometry;

    fn square_residual(j: &Jet1<f64>, f: impl Fn(f64) -> f64 + Sync) -> bool {
        j.check_contract(|x| Ok(f(x)), 1e-12 * (1.0 + j.value.abs())).unwrap().pass()
    }

    #[test]
    fn constants_and_variables() {
        let c = Jet1::constant(10.0, 5.0);
        assert_eq!((c.value, c.slope), (10.0, 0.0));
        assert!(c.env.is_zero());
        let v = Jet1::var(-2.0);
        assert_eq!((v.value, v.slope), (-2.0, 1.0));
    }

    #[test]
    fn square_at_three() {
        let x = Jet1::var(3.0);
        let sq = x.mul(&x).unwrap();
        assert_eq!((sq.value, sq.slope), (9.0, 6.0));
        assert!(square_residual(&sq, |x| x * x));
        let m = Jet1::monomial(2, 3.0);
        assert_eq!((m.value, m.slope, m.env.coeff()), (9.0, 6.0, 1.0));
        assert!(check_uniqueness(&sq, &m, &[0.5, 0.25, 1e-3]).unwrap().pass);
    }

    #[test]
    fn base_mismatch() {
        assert!(matches!(Jet1::var(1.0).add(&Jet1::var(2.0)), Err(Error::BasePointMismatch { .. })));
    }

    #[test]
    fn reciprocal_and_quotient() {
        let r = Jet1::var(2.0).recip().unwrap();
        assert_eq!((r.value, r.slope), (0.5, -0.25));
        assert!(square_residual(&r, |x| 1.0 / x));
        let x = Jet1::var(3.0);
        let q = x.mul(&x).unwrap().div(&x).unwrap();
        assert!((q.slope - 1.0f64).abs() < 1e-15);
        assert!(matches!(Jet1::constant(0.0, 1.0).recip(), Err(Error::DivisionDomain(_))));
    }

    #[test]
    fn chain_of_cubes() {
        let inner = Jet1::monomial(2, 2.0);
        let outer = Jet1::monomial(3, inner.value);
        let j = Jet1::chain(&outer, &inner).unwrap();
        assert_eq!(j.slope, 192.0);
        assert!(square_residual(&j, |x| x.powi(6)));
    }

    #[test]
    fn inverse_of_square() {
        let j = Jet1::inverse(&Jet1::monomial(2, 2.0)).unwrap();
        assert_eq!((j.x0, j.value, j.slope), (4.0, 2.0, 0.25));
        assert!(square_residual(&j, |x| x.sqrt()));
        assert!(matches!(Jet1::inverse(&Jet1::constant(1.0, 0.0)), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn rational_powers() {
        let j = Jet1::rational_power(1, 2, 4.0).unwrap();
        assert_eq!((j.value, j.slope), (2.0, 0.25));
        let j = Jet1::rational_power(-1, 1, 2.0).unwrap();
        let r = Jet1::var(2.0).recip().unwrap();
        assert_eq!((j.value, j.slope), (r.value, r.slope));
        let j = Jet1::rational_power(3, 2, 4.0).unwrap();
        assert!((j.slope - 3.0f64).abs() < 1e-14);
        assert!(square_residual(&j, |x| x.powf(1.5)));
        assert!(Jet1::rational_power(1, 2, -1.0).is_err());
    }

    #[test]
    fn transcendental_jets_hold_their_contracts() {
        let g = geometry();
        let floor = 1e-8;
        let j = g.sin_jet(0.7, 1e-12).unwrap();
        assert!(j.check_contract(|x| Ok(x.sin()), floor).unwrap().pass());
        let j = g.cosh_jet(-1.2, 1e-12).unwrap();
        assert!(j.check_contract(|x| Ok(x.cosh()), floor).unwrap().pass());
        let j = g.exp_jet(1.0, 1e-12).unwrap();
        assert!(j.check_contract(|x| Ok(x.exp()), floor).unwrap().pass());
        let j = g.ln_jet(1.0, 1e-12).unwrap();
        assert!((j.slope - 1.0).abs() < 1e-12);
        assert!(j.check_contract(|x| Ok(x.ln()), floor).unwrap().pass());
    }

    #[test]
    fn mismatched_slopes_fail_uniqueness() {
        let a = Jet1 { x0: 3.0, value: 9.0, slope: 6.0, env: ErrorEnvelope::linear(1.0, 1.0) };
        let b = Jet1 { slope: 6.5, ..a.clone() };
        let u = check_uniqueness(&a, &b, &[0.5, 0.25, 0.125, 0.0625]).unwrap();
        assert!(!u.pass);
        assert_eq!(u.witness, Some(0.125));
    }
}
