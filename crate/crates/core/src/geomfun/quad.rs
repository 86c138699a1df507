//! Rigorous area brackets for smooth integrands whose fourth derivative
//! keeps one sign on the integration interval.
//!
//! The end-corrected trapezoid rule `T − h²/12·(f'(b) − f'(a))` integrates
//! the cubic Hermite interpolant of every panel, so its error is
//! `+h⁴(b−a)/720 · f⁗(ξ)`. The end-corrected midpoint rule
//! `M + h²/24·(f'(b) − f'(a))` has a non-positive Peano kernel and error
//! `−7h⁴(b−a)/5760 · f⁗(η)`. With `f⁗` one-signed the two errors have
//! opposite signs, so the pair encloses the area. Each refinement is
//! intersected with the previous enclosure, which keeps the sequence of
//! brackets nested.

use crate::scalar::{CompensatedSum, Real};

/// Rigorous `[lo, hi]` enclosure of an area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaBracket<T> {
    pub lo: T,
    pub hi: T,
    pub n_panels: usize,
}

impl<T: Real> AreaBracket<T> {
    pub fn exact(v: T) -> Self {
        Self { lo: v, hi: v, n_panels: 0 }
    }

    pub fn new(lo: T, hi: T, n_panels: usize) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan());
        Self { lo, hi, n_panels }
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        self.lo + (self.hi - self.lo) * T::half()
    }

    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.lo + other.lo, self.hi + other.hi, self.n_panels.max(other.n_panels))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.lo - other.hi, self.hi - other.lo, self.n_panels.max(other.n_panels))
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.hi, -self.lo, self.n_panels)
    }

    /// Multiply by an exact scalar.
    pub fn scale(&self, k: T) -> Self {
        if k >= T::zero() {
            Self::new(self.lo * k, self.hi * k, self.n_panels)
        } else {
            Self::new(self.hi * k, self.lo * k, self.n_panels)
        }
    }

    /// Widen both ends by a few ulps of the magnitude to cover rounding in
    /// the closing arithmetic.
    pub fn padded(&self) -> Self {
        let pad = T::lit(4.0) * T::epsilon() * (self.lo.abs().max(self.hi.abs()));
        Self::new(self.lo - pad, self.hi + pad, self.n_panels)
    }

    pub(crate) fn intersect(&self, other: &Self) -> Self {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Self::new(lo, hi, other.n_panels)
        } else {
            // Only reachable through rounding at the last ulp.
            let m = lo + (hi - lo) * T::half();
            Self::new(m, m, other.n_panels)
        }
    }
}

/// Incrementally refined end-corrected trapezoid/midpoint bracket of
/// `∫_a^b f`, given `f` and `f'`.
pub struct CorrectedQuad<T, F> {
    f: F,
    a: T,
    b: T,
    n: usize,
    ends: T,
    dends: T,
    interior: CompensatedSum<T>,
    mids: T,
    abs_sum: T,
    best: Option<AreaBracket<T>>,
}

impl<T: Real, F: Fn(T) -> (T, T)> CorrectedQuad<T, F> {
    /// `f` returns `(f(t), f'(t))`; only endpoint derivatives are used.
    pub fn new(f: F, a: T, b: T, n0: usize) -> Self {
        let (fa, da) = f(a);
        let (fb, db) = f(b);
        let mut q = Self {
            f,
            a,
            b,
            n: 1,
            ends: fa + fb,
            dends: db - da,
            interior: CompensatedSum::new(),
            mids: T::zero(),
            abs_sum: (fa.abs() + fb.abs()) * T::half(),
            best: None,
        };
        q.mids = q.midpoint_sum();
        q.best = Some(q.raw_bracket());
        while q.n < n0.max(1) {
            q.refine();
        }
        q
    }

    fn midpoint_sum(&mut self) -> T {
        let h = (self.b - self.a) / T::from_usize_(self.n);
        let mut s = CompensatedSum::new();
        let mut abs = T::zero();
        for i in 0..self.n {
            let t = self.a + h * (T::from_usize_(i) + T::half());
            let v = (self.f)(t).0;
            abs = abs + v.abs();
            s.add(v);
        }
        self.abs_sum = self.abs_sum + abs;
        s.value()
    }

    pub fn panels(&self) -> usize {
        self.n
    }

    fn raw_bracket(&self) -> AreaBracket<T> {
        let h = (self.b - self.a) / T::from_usize_(self.n);
        let h2 = h * h;
        let trap = h * (self.ends * T::half() + self.interior.value()) - h2 / T::lit(12.0) * self.dends;
        let mid = h * self.mids + h2 / T::lit(24.0) * self.dends;
        // every evaluation and the closing sums carry relative rounding
        let eps = T::epsilon();
        let pad = T::lit(4.0) * eps * (h.abs() * self.abs_sum + (h2 * self.dends).abs()) + T::two() * eps * trap.abs();
        AreaBracket::new(trap.min(mid) - pad, trap.max(mid) + pad, self.n)
    }

    /// Double the panel count, reusing every previous evaluation.
    pub fn refine(&mut self) {
        self.interior.add(self.mids);
        self.n *= 2;
        self.mids = self.midpoint_sum();
        let raw = self.raw_bracket();
        self.best = Some(match self.best {
            Some(prev) => prev.intersect(&raw),
            None => raw,
        });
    }

    pub fn bracket(&self) -> AreaBracket<T> {
        self.best.unwrap_or_else(|| self.raw_bracket())
    }
}

pub(crate) trait QuadLike<T> {
    fn refine(&mut self);
    fn bracket(&self) -> AreaBracket<T>;
    fn panels(&self) -> usize;
}

impl<T: Real, F: Fn(T) -> (T, T)> QuadLike<T> for CorrectedQuad<T, F> {
    fn refine(&mut self) {
        CorrectedQuad::refine(self)
    }
    fn bracket(&self) -> AreaBracket<T> {
        CorrectedQuad::bracket(self)
    }
    fn panels(&self) -> usize {
        CorrectedQuad::panels(self)
    }
}

/// Area expression `base + Σ ±∫ f_i`, where `base` is already a bracket
/// and each quadrature is refined on demand.
pub struct AreaExpr<T> {
    base: AreaBracket<T>,
    quads: Vec<(T, Box<dyn QuadLike<T> + Send>)>,
}

impl<T: Real> AreaExpr<T> {
    pub fn constant(base: AreaBracket<T>) -> Self {
        Self { base, quads: Vec::new() }
    }

    /// `base + sign * ∫ f`, with `sign` exactly `±1`.
    pub fn with_quad<F>(base: AreaBracket<T>, sign: T, quad: CorrectedQuad<T, F>) -> Self
    where
        F: Fn(T) -> (T, T) + Send + 'static,
    {
        Self::constant(base).plus(sign, quad)
    }

    pub fn plus<F>(mut self, sign: T, quad: CorrectedQuad<T, F>) -> Self
    where
        F: Fn(T) -> (T, T) + Send + 'static,
    {
        self.quads.push((sign, Box::new(quad)));
        self
    }

    pub fn bracket(&self) -> AreaBracket<T> {
        let mut acc = self.base;
        for (sign, q) in &self.quads {
            let qb = q.bracket();
            let qb = if *sign < T::zero() { qb.neg() } else { qb };
            acc = acc.add(&qb);
        }
        if self.quads.is_empty() {
            acc
        } else {
            acc.padded()
        }
    }

    pub fn panels(&self) -> usize {
        self.quads.iter().map(|(_, q)| q.panels()).max().unwrap_or(0)
    }

    /// `k − self`.
    pub fn negated(mut self, k: AreaBracket<T>) -> Self {
        self.base = k.sub(&self.base);
        for (sign, _) in &mut self.quads {
            *sign = -*sign;
        }
        self
    }

    /// `k + self`.
    pub fn shifted(mut self, k: AreaBracket<T>) -> Self {
        self.base = self.base.add(&k);
        self
    }

    /// Double the panels of every component still below `cap`. Returns
    /// false once nothing can be refined.
    pub fn refine(&mut self, cap: usize) -> bool {
        let mut any = false;
        for (_, q) in &mut self.quads {
            if q.panels() < cap {
                q.refine();
                any = true;
            }
        }
        any
    }

    /// Refine until the width is at most `tol`.
    pub fn refine_to(&mut self, tol: T, cap: usize) -> Option<AreaBracket<T>> {
        loop {
            let b = self.bracket();
            if b.width() <= tol {
                return Some(b);
            }
            if !self.refine(cap) {
                return None;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recip(t: f64) -> (f64, f64) {
        (1.0 / t, -1.0 / (t * t))
    }

    #[test]
    fn reciprocal_bracket_contains_ln2_and_nests() {
        let mut q = CorrectedQuad::new(recip, 1.0, 2.0, 1);
        let mut prev = q.bracket();
        assert!(prev.contains(std::f64::consts::LN_2));
        for _ in 0..10 {
            q.refine();
            let b = q.bracket();
            assert!(b.contains(std::f64::consts::LN_2), "{b:?}");
            assert!(b.lo >= prev.lo && b.hi <= prev.hi);
            prev = b;
        }
        assert!(prev.width() < 1e-13, "{prev:?}");
    }

    #[test]
    fn concave_circle_integrand_is_bracketed() {
        let exact = 0.5 * (0.5 * (0.75f64).sqrt() + (0.5f64).asin());
        let f = |s: f64| ((1.0 - s * s).sqrt(), -s / (1.0 - s * s).sqrt());
        let mut q = CorrectedQuad::new(f, 0.0, 0.5, 1);
        for _ in 0..12 {
            assert!(q.bracket().contains(exact), "{:?} {exact}", q.bracket());
            q.refine();
        }
    }

    #[test]
    fn cubic_integrand_is_exact() {
        let f = |t: f64| (t * t * t - 2.0 * t, 3.0 * t * t - 2.0);
        let q = CorrectedQuad::new(f, 0.0, 2.0, 1);
        let b = q.bracket();
        assert!(b.contains(0.0), "{b:?}");
        assert!(b.width() < 1e-12, "{b:?}");
    }

    #[test]
    fn expression_combines_components() {
        let mut e = AreaExpr::with_quad(AreaBracket::exact(1.0), 1.0, CorrectedQuad::new(recip, 1.0, 2.0, 1))
            .plus(-1.0, CorrectedQuad::new(recip, 2.0, 4.0, 1));
        // ∫_1^2 − ∫_2^4 of 1/t is zero
        let b = e.refine_to(1e-12, 1 << 20).unwrap();
        assert!(b.contains(1.0));
    }
}
