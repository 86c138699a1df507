//! Order-n Taylor jets `f(x0 + ε) = p_n(ε) + |ε|^n·E(ε)`.
//!
//! Coefficients come from truncated power-series arithmetic; the remainder
//! envelope is fitted to samples and certified on the envelope grid.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::envelope::{certification_grid, env_scale_bounded, env_sum_all, one_sided_grid, slack, Certification, ErrorEnvelope, Witness};
use crate::error::{Error, Result};
use crate::scalar::{powu, Real};

/// Truncated Taylor expansion with a certified remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet<T: Real> {
    pub x0: T,
    /// `c_k = f^(k)(x0)/k!` for `k = 0..=n`.
    pub coeffs: Vec<T>,
    pub env: ErrorEnvelope<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl<T: Real> TaylorJet<T> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    /// `p_n(ε)` by Horner.
    pub fn poly(&self, eps: T) -> T {
        horner(&self.coeffs, eps)
    }

    /// Grid check of `|f(x0+ε) − p_n(ε)| ≤ |ε|^n·bound(ε) + floor`.
    pub fn check_remainder<F>(&self, f: F, floor: T) -> Result<Certification<T>>
    where
        F: Fn(T) -> Result<T> + Sync,
    {
        let n = self.order() as u32;
        let grid = certification_grid(self.env.radius());
        let rows: Vec<Result<(T, T, T)>> = grid
            .par_iter()
            .map(|&e| {
                let eff = (self.x0 + e) - self.x0;
                let res = f(self.x0 + e)? - self.poly(eff);
                Ok((eff, res, powu(eff.abs(), n) * self.env.bound(eff)))
            })
            .collect();
        let k = slack::<T>();
        let mut checked = 0;
        for row in rows {
            let (e, res, b) = row?;
            if !res.is_finite() {
                return Err(Error::SamplerFailure { eps: e.f64() });
            }
            checked += 1;
            if res.abs() > b * k + floor {
                return Ok(Certification { checked, witness: Some(Witness { eps: e, observed: res.abs(), bound: b * k + floor }) });
            }
        }
        Ok(Certification { checked, witness: None })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x0": self.x0.f64(),
            "order": self.order(),
            "coeffs": self.coeffs.iter().map(|c| c.f64()).collect::<Vec<_>>(),
            "env": self.env.to_json(),
        })
    }
}

pub fn horner<T: Real>(c: &[T], eps: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &ck| acc * eps + ck)
}

/// `Σ |c_k| r^k`.
pub fn abs_sum<T: Real>(c: &[T], r: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &ck| acc * r + ck.abs())
}

/// Truncated series arithmetic on coefficient vectors of equal length.
pub mod series {
    use super::*;

    pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
        a.iter().zip(b).map(|(&x, &y)| x + y).collect()
    }

    pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
        a.iter().zip(b).map(|(&x, &y)| x - y).collect()
    }

    pub fn neg<T: Real>(a: &[T]) -> Vec<T> {
        a.iter().map(|&x| -x).collect()
    }

    pub fn scale<T: Real>(a: &[T], k: T) -> Vec<T> {
        a.iter().map(|&x| x * k).collect()
    }

    /// Cauchy product truncated to the common length.
    pub fn mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
        let n = a.len().min(b.len());
        (0..n).map(|k| (0..=k).fold(T::zero(), |s, i| s + a[i] * b[k - i])).collect()
    }

    /// `a/b` by the recurrence `q_k = (a_k − Σ_{i<k} q_i b_{k−i}) / b_0`.
    pub fn div<T: Real>(a: &[T], b: &[T]) -> Result<Vec<T>> {
        if b[0] == T::zero() {
            return Err(Error::DivisionDomain("division by a series with zero constant term".into()));
        }
        let n = a.len().min(b.len());
        let mut q: Vec<T> = Vec::with_capacity(n);
        for k in 0..n {
            let s = (0..k).fold(a[k], |s, i| s - q[i] * b[k - i]);
            q.push(s / b[0]);
        }
        Ok(q)
    }

    /// Non-negative integer power by squaring; exact for a zero constant term.
    pub fn powu<T: Real>(a: &[T], mut k: u64) -> Vec<T> {
        let mut out = vec![T::zero(); a.len()];
        out[0] = T::one();
        let mut base = a.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                out = mul(&out, &base);
            }
            k >>= 1;
            if k > 0 {
                base = mul(&base, &base);
            }
        }
        out
    }

    /// `Σ outer_k (inner − c0)^k` by Horner, where `outer` is expanded about
    /// `c0 = inner[0]`. `base` is the point `outer` was expanded about.
    pub fn compose<T: Real>(outer: &[T], inner: &[T], base: T) -> Result<Vec<T>> {
        let tol = T::lit(1e-12) * (T::one() + base.abs());
        if (inner[0] - base).abs() > tol {
            return Err(Error::BasePointMismatch { left: inner[0].f64(), right: base.f64() });
        }
        let mut u = inner.to_vec();
        u[0] = T::zero();
        let n = outer.len().min(inner.len());
        let mut acc = vec![T::zero(); n];
        for k in (0..n).rev() {
            acc = mul(&acc, &u[..n]);
            acc[0] = acc[0] + outer[k];
        }
        Ok(acc)
    }

    /// Series of a function whose derivatives at the base point repeat with
    /// the given cycle, e.g. `[sin, cos, −sin, −cos]`.
    pub fn from_cycle<T: Real>(cycle: &[T], n: usize) -> Vec<T> {
        let mut fact = T::one();
        (0..=n)
            .map(|k| {
                if k > 0 {
                    fact = fact * T::from_usize_(k);
                }
                cycle[k % cycle.len()] / fact
            })
            .collect()
    }

    /// `ln(c0 + ε)`: `ln c0, 1/c0, −1/(2c0²), …`.
    pub fn ln_tail<T: Real>(value: T, c0: T, n: usize) -> Vec<T> {
        let mut out = vec![value];
        let mut pw = T::one();
        for k in 1..=n {
            pw = pw / c0;
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            out.push(sign * pw / T::from_usize_(k));
        }
        out
    }

    /// `(c0 + ε)^q = c0^q Σ binom(q, k) (ε/c0)^k` with `c0^q` supplied.
    pub fn binomial<T: Real>(value: T, c0: T, q: T, n: usize) -> Vec<T> {
        let mut out = vec![value];
        let mut coef = value;
        for k in 1..=n {
            coef = coef * (q - T::from_usize_(k - 1)) / (T::from_usize_(k) * c0);
            out.push(coef);
        }
        out
    }
}

/// Combine two Taylor jets of the same base point and order.
///
/// With `a = P_a + |ε|^n E_a` and `b = P_b + |ε|^n E_b`, the product's dropped
/// terms are `Σ_{i+j>n} a_i b_j ε^{i+j}`, bounded by `|ε|^{n+1}·K`, and the
/// cross terms by `|ε|^n (E_a·sup|b| + E_b·sup|P_a|)`. The quotient `q = a/b`
/// satisfies `(a − q_n b) = |ε|^n (E_a − q_n E_b) − (q_n P_b)_{>n}` and
/// `|b| ≥ |b_0|/2` on a shrunk radius.
pub fn tjet_arith<T: Real>(a: &TaylorJet<T>, b: &TaylorJet<T>, op: SeriesOp) -> Result<TaylorJet<T>> {
    if a.x0 != b.x0 {
        return Err(Error::BasePointMismatch { left: a.x0.f64(), right: b.x0.f64() });
    }
    let n = a.order().min(b.order());
    let (a, b) = (a.truncated(n)?, b.truncated(n)?);
    let (ca, cb) = (&a.coeffs[..], &b.coeffs[..]);
    let (ea, eb) = (a.env.clone(), b.env.clone());
    let r = ea.radius().min(eb.radius()).min(T::one());
    let (coeffs, env) = match op {
        SeriesOp::Add => (series::add(ca, cb), env_sum_all(&[ea, eb])?),
        SeriesOp::Sub => (series::sub(ca, cb), env_sum_all(&[ea, eb])?),
        SeriesOp::Mul => {
            let c = series::mul(ca, cb);
            let k = tail_coeff(ca, cb, n, r);
            let sup_b = abs_sum(cb, r) + powu(r, n as u32) * eb.bound(r);
            let env = env_sum_all(&[
                ErrorEnvelope::linear(k, r),
                env_scale_bounded(&ea, sup_b)?,
                env_scale_bounded(&eb, abs_sum(ca, r))?,
            ])?;
            (c, env)
        }
        SeriesOp::Div => {
            let q = series::div(ca, cb)?;
            let b0 = cb[0].abs();
            let mut rr = r;
            for _ in 0..200 {
                let drift = abs_sum(&cb[1..], rr) * rr + powu(rr, n as u32) * eb.bound(rr);
                if drift <= b0 * T::half() {
                    break;
                }
                rr = rr * T::half();
            }
            let k = tail_coeff(&q, cb, n, rr);
            let inner = env_sum_all(&[
                ea.restricted(rr),
                ErrorEnvelope::linear(k, rr),
                env_scale_bounded(&eb.restricted(rr), abs_sum(&q, rr))?,
            ])?;
            (q, env_scale_bounded(&inner, T::two() / b0)?)
        }
    };
    Ok(TaylorJet { x0: a.x0, coeffs, env })
}

/// `Σ_{i+j>n, i,j≤n} |a_i||b_j| r^{i+j−n−1}`.
fn tail_coeff<T: Real>(a: &[T], b: &[T], n: usize, r: T) -> T {
    let mut k = T::zero();
    for i in 0..=n {
        for j in (n + 1 - i)..=n {
            k = k + a[i].abs() * b[j].abs() * powu(r, (i + j - n - 1) as u32);
        }
    }
    k
}

impl<T: Real> TaylorJet<T> {
    /// The same jet at a lower order.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let m = self.order();
        if n == 0 || n > m {
            return Err(Error::InvalidArgument(format!("cannot truncate order {m} to {n}")));
        }
        if n == m {
            return Ok(self.clone());
        }
        let r = self.env.radius().min(T::one());
        let dropped = abs_sum(&self.coeffs[n + 1..], r);
        let rest = env_scale_bounded(&self.env, powu(r, (m - n) as u32))?;
        let env = env_sum_all(&[ErrorEnvelope::linear(dropped, r), rest])?;
        Ok(Self { x0: self.x0, coeffs: self.coeffs[..=n].to_vec(), env })
    }
}

/// Fitted remainder `C·|ε|^p` for `R(ε)/|ε|^n`, from samples `(ε, R)`.
/// Points with `|R| ≤ noise` are ignored. Returns `(C, p)`, or `None` when
/// there is no signal.
pub fn fit_remainder<T: Real>(samples: &[(T, T)], n: usize, noise: T) -> Option<(T, T)> {
    let sig: Vec<(T, T)> = samples
        .iter()
        .filter(|(e, v)| *e != T::zero() && v.abs() > noise)
        .map(|&(e, v)| (e, v.abs() / powu(e.abs(), n as u32)))
        .collect();
    if sig.is_empty() {
        return None;
    }
    let pts: Vec<(f64, f64)> = sig.iter().map(|(e, q)| (e.abs().f64().ln(), q.f64().ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / m;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
    let p = T::lit(if sxx > 0.0 { sxy / sxx } else { 0.0 });
    let c = sig.iter().map(|(e, q)| *q / e.abs().powf(p)).fold(T::zero(), T::max);
    Some((c * T::lit(1.1), p))
}

/// Outcome of a Peano-remainder check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeanoVerdict<T> {
    pub pass: bool,
    /// Fitted `(C, p)` of `|R(ε)|/|ε|^n ≈ C|ε|^p`; `(0, 1)` without signal.
    pub c: T,
    pub p: T,
    /// Where the ratio was largest among the smallest signal points.
    pub witness: Option<T>,
}

impl<T: Real> PeanoVerdict<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "C": self.c.f64(),
            "p": self.p.f64(),
            "witness": self.witness.map(|w| w.f64()),
        })
    }
}

/// Does `(f(x0+ε) − p_n(ε))/|ε|^n` shrink to 0?
///
/// Samples both sides at `r·2^-k`, ignores residuals below `noise`, fits
/// `C|ε|^p` to the ratio and passes when `p > 0` and the ratio at the
/// smallest signal point is below the ratio at the largest.
pub fn verify_peano<T, F>(tj: &TaylorJet<T>, f: F, noise: T) -> Result<PeanoVerdict<T>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    let n = tj.order();
    let mut eps: Vec<T> = one_sided_grid(tj.env.radius());
    eps.extend(one_sided_grid(tj.env.radius()).into_iter().map(|e| -e));
    let samples: Vec<(T, T)> = eps
        .par_iter()
        .map(|&e| {
            let eff = (tj.x0 + e) - tj.x0;
            Ok((eff, f(tj.x0 + e)? - tj.poly(eff)))
        })
        .collect::<Result<_>>()?;
    for &(e, v) in &samples {
        if !v.is_finite() {
            return Err(Error::SamplerFailure { eps: e.f64() });
        }
    }
    let Some((c, p)) = fit_remainder(&samples, n, noise) else {
        return Ok(PeanoVerdict { pass: true, c: T::zero(), p: T::one(), witness: None });
    };
    let mut sig: Vec<(T, T)> = samples
        .iter()
        .filter(|(e, v)| *e != T::zero() && v.abs() > noise)
        .map(|&(e, v)| (e, v.abs() / powu(e.abs(), n as u32)))
        .collect();
    sig.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).expect("finite"));
    let (small, large) = (sig[0], sig[sig.len() - 1]);
    let shrinks = sig.len() < 2 || small.1 <= large.1;
    let pass = p > T::zero() && shrinks;
    let witness = if pass { None } else { Some(small.0) };
    Ok(PeanoVerdict { pass, c, p, witness })
}
