//! Curvilinear regions on the three quadratic curves and the bisection
//! solver that selects the curve point enclosing a prescribed area.

use crate::error::{Error, Result};
use crate::scalar::{sqrt, Real};

use super::quad::{AreaBracket, AreaExpr, CorrectedQuad};

/// The three defining curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveId {
    /// `x² + y² = 1`
    Circle,
    /// `x² − y² = 1`, right branch
    Hyperbola,
    /// `xy = 1`, first quadrant
    SkewHyperbola,
}

impl CurveId {
    pub const ALL: [CurveId; 3] = [CurveId::Circle, CurveId::Hyperbola, CurveId::SkewHyperbola];

    pub fn name(&self) -> &'static str {
        match self {
            CurveId::Circle => "circle",
            CurveId::Hyperbola => "hyperbola",
            CurveId::SkewHyperbola => "skew",
        }
    }

    /// Signed residual of the curve equation at `(x, y)`.
    pub fn residual<T: Real>(&self, x: T, y: T) -> T {
        match self {
            CurveId::Circle => x * x + y * y - T::one(),
            CurveId::Hyperbola => x * x - y * y - T::one(),
            CurveId::SkewHyperbola => x * y - T::one(),
        }
    }
}

pub(crate) const PANEL_CAP: usize = 1 << 26;
pub(crate) const MAX_BISECTIONS: usize = 200;
const START_PANELS: usize = 4;

/// `√½`, the height of the octant point on the unit circle.
pub(crate) fn octant_height<T: Real>() -> T {
    sqrt(T::half())
}

/// Circular sector cut by the x-axis and the ray to `(√(1−y²), y)`,
/// integrated in horizontal slices. Valid for `0 ≤ y ≤ √½`; the slice
/// length `√(1−s²) − s·x/y` has a negative fourth derivative.
pub(crate) fn circle_by_height<T: Real>(y: T, n0: usize) -> AreaExpr<T> {
    if y <= T::zero() {
        return AreaExpr::constant(AreaBracket::exact(T::zero()));
    }
    let x = sqrt((T::one() - y) * (T::one() + y));
    let slope = x / y;
    let f = move |s: T| {
        let r = sqrt((T::one() - s) * (T::one() + s));
        (r - s * slope, -s / r - slope)
    };
    AreaExpr::with_quad(AreaBracket::exact(T::zero()), T::one(), CorrectedQuad::new(f, T::zero(), y, n0))
}

/// Hyperbolic sector from the apex to `(√(1+y²), y)` in horizontal slices
/// `√(1+s²) − s·x/y`. The fourth derivative changes sign once, at `s = ½`,
/// so the integral is split there.
pub(crate) fn hyperbola_by_height<T: Real>(y: T, n0: usize) -> AreaExpr<T> {
    if y <= T::zero() {
        return AreaExpr::constant(AreaBracket::exact(T::zero()));
    }
    let x = sqrt(T::one() + y * y);
    let slope = x / y;
    let f = move |s: T| {
        let r = sqrt(T::one() + s * s);
        (r - s * slope, s / r - slope)
    };
    let zero = AreaBracket::exact(T::zero());
    let knee = T::half();
    if y <= knee {
        AreaExpr::with_quad(zero, T::one(), CorrectedQuad::new(f, T::zero(), y, n0))
    } else {
        AreaExpr::with_quad(zero, T::one(), CorrectedQuad::new(f, T::zero(), knee, n0))
            .plus(T::one(), CorrectedQuad::new(f, knee, y, n0))
    }
}

fn shifted_recip<T: Real>(s: T) -> (T, T) {
    let v = T::one() / (T::one() + s);
    (v, -v * v)
}

/// Area under `xy = 1` between `t = 1` and `t = 1 + u`, `u ≥ 0`.
///
/// Past `t = 2` the octave `[2^k, 2^(k+1)]` is mapped back onto `[1, 2]`
/// by the area-preserving map `diag(2^k, 2^-k)`, so each full octave
/// contributes exactly the cached `ln2` bracket.
pub(crate) fn skew_by_excess<T: Real>(u: T, ln2: &AreaBracket<T>, n0: usize) -> AreaExpr<T> {
    if u <= T::zero() {
        return AreaExpr::constant(AreaBracket::exact(T::zero()));
    }
    if u < T::one() {
        return AreaExpr::with_quad(AreaBracket::exact(T::zero()), T::one(), CorrectedQuad::new(shifted_recip, T::zero(), u, n0));
    }
    let (k, m) = octave_split(T::one() + u);
    let base = ln2.scale(T::from_i64(k).unwrap());
    let rest = m - T::one();
    if rest <= T::zero() {
        return AreaExpr::constant(base);
    }
    AreaExpr::with_quad(base, T::one(), CorrectedQuad::new(shifted_recip, T::zero(), rest, n0))
}

/// Area under `xy = 1` over `[1, 2]`.
pub(crate) fn skew_unit_octave<T: Real>(n0: usize) -> AreaExpr<T> {
    AreaExpr::with_quad(AreaBracket::exact(T::zero()), T::one(), CorrectedQuad::new(shifted_recip, T::zero(), T::one(), n0))
}

/// Write `x > 0` as `2^k · m` with `m ∈ [1, 2)`; scaling by 2 is exact.
pub(crate) fn octave_split<T: Real>(x: T) -> (i64, T) {
    let mut m = x;
    let mut k = 0i64;
    let two = T::two();
    while m >= two {
        m = m / two;
        k += 1;
    }
    while m < T::one() {
        m = m * two;
        k -= 1;
    }
    (k, m)
}

/// Signed area under `xy = 1` from `t = 1` to `t = x > 0`.
pub(crate) fn skew_log_area<T: Real>(x: T, ln2: &AreaBracket<T>, n0: usize) -> AreaExpr<T> {
    let (k, m) = octave_split(x);
    let base = ln2.scale(T::from_i64(k).unwrap());
    let rest = m - T::one();
    if rest <= T::zero() {
        return AreaExpr::constant(base);
    }
    AreaExpr::with_quad(base, T::one(), CorrectedQuad::new(shifted_recip, T::zero(), rest, n0))
}

/// Area under `xy = 1` over `[a, b]`, `0 < a ≤ b`, integrated directly.
pub(crate) fn skew_between<T: Real>(a: T, b: T, n0: usize) -> AreaExpr<T> {
    let f = |t: T| (T::one() / t, -T::one() / (t * t));
    AreaExpr::with_quad(AreaBracket::exact(T::zero()), T::one(), CorrectedQuad::new(f, a, b, n0))
}

/// Result of an area solve.
#[derive(Debug, Clone, Copy)]
pub struct Solved<T> {
    pub param: T,
    pub area: AreaBracket<T>,
    pub iterations: usize,
}

/// Bisection on a parameter `p` for an area that increases with `p`.
///
/// Each step refines the area bracket at the midpoint only until it
/// separates from the target bracket; when roundoff prevents separation
/// the midpoint is already as accurate as the arithmetic allows.
pub(crate) fn solve_increasing<T, A>(
    area: A,
    target: AreaBracket<T>,
    mut lo: T,
    mut hi: T,
    rel_tol: T,
) -> Result<Solved<T>>
where
    T: Real,
    A: Fn(T, usize) -> AreaExpr<T>,
{
    let rel_tol = rel_tol.max(T::lit(4.0) * T::epsilon());
    let mut last = AreaBracket::exact(T::zero());
    for it in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) * T::half();
        if hi - lo <= rel_tol * mid.abs() || mid <= lo || mid >= hi {
            return Ok(Solved { param: mid, area: last, iterations: it });
        }
        let mut e = area(mid, START_PANELS);
        let mut prev_width = T::infinity();
        loop {
            let b = e.bracket();
            last = b;
            if b.hi < target.lo {
                lo = mid;
                break;
            }
            if b.lo > target.hi {
                hi = mid;
                break;
            }
            // corrected rules shrink 16-fold per doubling until rounding takes over
            let stalled = b.width() > prev_width * T::half();
            if stalled || !e.refine(PANEL_CAP) {
                return Ok(Solved { param: mid, area: b, iterations: it });
            }
            prev_width = b.width();
        }
    }
    Err(Error::NonConvergence { iterations: MAX_BISECTIONS })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octave_split_is_exact() {
        let (k, m) = octave_split(12.0f64);
        assert_eq!((k, m), (3, 1.5));
        let (k, m) = octave_split(0.3f64);
        assert_eq!(k, -2);
        assert_eq!(m * 0.25, 0.3);
    }

    #[test]
    fn circle_slice_area_matches_sector() {
        // sector of angle θ has area θ/2
        let theta = 0.5f64;
        let mut e = circle_by_height(theta.sin(), 8);
        let b = e.refine_to(1e-12, PANEL_CAP).unwrap();
        assert!((b.mid() - theta / 2.0).abs() < 1e-12, "{b:?}");
    }

    #[test]
    fn hyperbola_slice_area_matches_sector() {
        let a = 1.3f64;
        let mut e = hyperbola_by_height(a.sinh(), 8);
        let b = e.refine_to(1e-12, PANEL_CAP).unwrap();
        assert!((b.mid() - a / 2.0).abs() < 1e-12, "{b:?}");
    }
}
