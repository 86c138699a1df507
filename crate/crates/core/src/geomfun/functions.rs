//! Point selection on the curves and the extensions beyond the base ranges.

use crate::error::{Error, Result};
use crate::scalar::{sqrt, Real};

use super::area::{self, CurveId, PANEL_CAP};
use super::quad::{AreaBracket, AreaExpr};
use super::Geometry;

fn check_args<T: Real>(a: T, tol: T) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {a}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn overflow<T: Real>(v: T, what: &str) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("{what} exceeds the representable range")))
    }
}

/// Number of halvings that bring `|a|` into `[0, 2]`.
fn halvings<T: Real>(a: T) -> u32 {
    let mut k = 0;
    let mut r = a.abs();
    while r > T::two() {
        r = r * T::half();
        k += 1;
    }
    k
}

impl<T: Real> Geometry<T> {
    /// Sine height solve: the circle sector with apex angle below the
    /// octant whose area lies in `target`.
    fn circle_height(&self, target: AreaBracket<T>, tol: T) -> Result<T> {
        if target.hi <= T::zero() {
            return Ok(T::zero());
        }
        // For y ≤ √½ the sector area S satisfies y·x/2 ≤ S ≤ y(1 − x/2)
        // with x ≥ √½, which pins y to [1.5 S, 2.9 S].
        let lo = (T::lit(1.5) * target.lo).max(T::zero());
        let hi = (T::lit(2.9) * target.hi).min(T::lit(0.72));
        let s = area::solve_increasing(area::circle_by_height, target, lo, hi, tol)?;
        Ok(s.param)
    }

    /// Curve point for a half-area `h` in `[0, π/2]`, via octant symmetry
    /// and quarter turns.
    fn circle_point(&self, h: AreaBracket<T>, tol: T) -> Result<(T, T)> {
        let o = self.octant;
        let quarter = o.scale(T::two());
        let hm = h.mid();
        if h.hi <= T::zero() {
            Ok((T::one(), T::zero()))
        } else if hm < o.mid() {
            let y = self.circle_height(h, tol)?;
            Ok((sqrt((T::one() - y) * (T::one() + y)), y))
        } else if hm < quarter.mid() {
            // mirror in y = x: the complementary sector inside the quarter
            let t = self.circle_height(quarter.sub(&h), tol)?;
            Ok((t, sqrt((T::one() - t) * (T::one() + t))))
        } else {
            let (c, s) = self.circle_point(h.sub(&quarter), tol)?;
            Ok((-s, c))
        }
    }

    /// `(cos A, sin A)`: the point of the unit circle whose sector from
    /// `(1, 0)` has area `A/2`, extended by `cos(A + nπ) = (−1)ⁿ cos A`.
    pub fn cos_sin(&self, a: T, tol: T) -> Result<(T, T)> {
        check_args(a, tol)?;
        if a < T::zero() {
            let (c, s) = self.cos_sin(-a, tol)?;
            return Ok((c, -s));
        }
        let pi = self.pi();
        let n = (a / pi.mid()).floor();
        let reduced = AreaBracket::new(a - n * pi.hi, a - n * pi.lo, 0);
        let (c, s) = self.circle_point(reduced.scale(T::half()), tol)?;
        let odd = n.to_f64().map_or(false, |v| v.rem_euclid(2.0) == 1.0);
        Ok(if odd { (-c, -s) } else { (c, s) })
    }

    fn hyperbola_height(&self, half_area: T, tol: T) -> Result<T> {
        if half_area <= T::zero() {
            return Ok(T::zero());
        }
        // sinh(2t) lies between 2t and 2t·cosh 2 < 7.6 t for t ≤ 1
        let target = AreaBracket::exact(half_area);
        let lo = T::lit(1.99) * half_area;
        let hi = T::lit(7.6) * half_area;
        Ok(area::solve_increasing(area::hyperbola_by_height, target, lo, hi, tol)?.param)
    }

    /// `(cosh A, sinh A)`: the point of `x² − y² = 1` whose sector from the
    /// apex has area `A/2`. Past `|A| = 2` the argument is halved and the
    /// doubling map `(x, y) ↦ (x² + y², 2xy)` applied.
    pub fn cosh_sinh(&self, a: T, tol: T) -> Result<(T, T)> {
        check_args(a, tol)?;
        self.cosh_sinh_with(a, tol, halvings(a))
    }

    /// [`Self::cosh_sinh`] with an explicit number of halvings, so the
    /// doubling path can be compared against the direct solve.
    pub fn cosh_sinh_with(&self, a: T, tol: T, k: u32) -> Result<(T, T)> {
        check_args(a, tol)?;
        if a < T::zero() {
            let (c, s) = self.cosh_sinh_with(-a, tol, k)?;
            return Ok((c, -s));
        }
        let scale = T::two().powi(k as i32);
        let base = a / scale;
        if base > T::two() {
            return Err(Error::InvalidArgument(format!("{k} halvings leave {base} outside the base range")));
        }
        let tol0 = tol / (scale * T::two());
        let y = self.hyperbola_height(base * T::half(), tol0)?;
        let (mut c, mut s) = (sqrt(T::one() + y * y), y);
        for _ in 0..k {
            let c2 = c * c + s * s;
            s = T::two() * c * s;
            c = overflow(c2, "cosh")?;
        }
        Ok((c, overflow(s, "sinh")?))
    }

    /// `exp A − 1` for `0 ≤ A ≤ 2`: the excess `u` such that the area under
    /// `xy = 1` over `[1, 1 + u]` is `A`.
    pub(crate) fn exp_m1_base(&self, a: T, tol: T) -> Result<T> {
        if a <= T::zero() {
            return Ok(T::zero());
        }
        // a ≤ u ≤ (e² − 1)/2 · a on [0, 2]
        let ln2 = self.ln2;
        let f = move |u: T, n0: usize| area::skew_by_excess(u, &ln2, n0);
        Ok(area::solve_increasing(f, AreaBracket::exact(a), a, T::lit(3.2) * a, tol)?.param)
    }

    /// `exp A`: the abscissa where the area under `xy = 1` from `1` equals
    /// `A`. Larger arguments use `exp A = exp(A/2)²`; negative ones the
    /// reflection `exp(−A) = 1/exp A`.
    pub fn exp(&self, a: T, tol: T) -> Result<T> {
        check_args(a, tol)?;
        if a < T::zero() {
            return Ok(T::one() / self.exp(-a, tol)?);
        }
        let k = halvings(a);
        let scale = T::two().powi(k as i32);
        let mut v = T::one() + self.exp_m1_base(a / scale, tol / (scale * T::two()))?;
        for _ in 0..k {
            v = overflow(v * v, "exp")?;
        }
        Ok(v)
    }

    /// `ln x` as the signed area under `xy = 1` from `1` to `x`, the
    /// functional inverse of [`Self::exp`].
    pub fn ln(&self, x: T, tol: T) -> Result<T> {
        check_args(x, tol)?;
        if x <= T::zero() {
            return Err(Error::Domain(format!("ln of non-positive {x}")));
        }
        let mut e = area::skew_log_area(x, &self.ln2, 8);
        let b = refine_rel(&mut e, tol)?;
        Ok(b.mid())
    }

    /// The curve point selecting a region of the given area: half-area of
    /// the sector for the circle and hyperbola, area under the curve for
    /// the skew hyperbola.
    pub fn solve_area(&self, curve: CurveId, target: T, tol: T) -> Result<(T, T)> {
        check_args(target, tol)?;
        if target < T::zero() {
            return Err(Error::Domain(format!("negative area {target}")));
        }
        match curve {
            CurveId::Circle => {
                let limit = self.octant.hi * T::lit(4.0);
                if target > limit {
                    return Err(Error::Domain(format!("circle half-area {target} beyond the upper half disc")));
                }
                self.circle_point(AreaBracket::exact(target), tol)
            }
            CurveId::Hyperbola => self.cosh_sinh(T::two() * target, tol),
            CurveId::SkewHyperbola => {
                let x = self.exp(target, tol)?;
                Ok((x, T::one() / x))
            }
        }
    }

    /// Bracket of the region selected by the curve point with abscissa `x`.
    ///
    /// Circle: sector from `(1, 0)` to `(x, √(1−x²))`, `x ∈ [−1, 1]`.
    /// Hyperbola: sector from the apex to `(x, √(x²−1))`, `x ≥ 1`.
    /// Skew: signed area under `xy = 1` from `1` to `x > 0`.
    pub fn sector_area(&self, curve: CurveId, x: T, tol: T) -> Result<AreaBracket<T>> {
        check_args(x, tol)?;
        let c = area::octant_height::<T>();
        let mut e: AreaExpr<T> = match curve {
            CurveId::Circle => {
                if !(x >= -T::one() && x <= T::one()) {
                    return Err(Error::Domain(format!("circle abscissa {x} outside [-1, 1]")));
                }
                let y = sqrt((T::one() - x) * (T::one() + x));
                let o2 = self.octant.scale(T::two());
                let o4 = self.octant.scale(T::lit(4.0));
                if x >= c {
                    area::circle_by_height(y, 8)
                } else if x >= T::zero() {
                    area::circle_by_height(x, 8).negated(o2)
                } else if x >= -c {
                    area::circle_by_height(-x, 8).shifted(o2)
                } else {
                    area::circle_by_height(y, 8).negated(o4)
                }
            }
            CurveId::Hyperbola => {
                if !(x >= T::one()) {
                    return Err(Error::Domain(format!("hyperbola abscissa {x} below 1")));
                }
                area::hyperbola_by_height(sqrt((x - T::one()) * (x + T::one())), 8)
            }
            CurveId::SkewHyperbola => {
                if !(x > T::zero()) {
                    return Err(Error::Domain(format!("skew abscissa {x} not positive")));
                }
                area::skew_log_area(x, &self.ln2, 8)
            }
        };
        let best = e.bracket();
        e.refine_to(tol, PANEL_CAP).ok_or_else(|| {
            let b = e.bracket();
            Error::ToleranceUnreachable { tol: tol.f64(), width: b.width().min(best.width()).f64() }
        })
    }
}

/// Refine until the width is below `tol·max(1, |mid|)` or rounding stops
/// further progress.
fn refine_rel<T: Real>(e: &mut AreaExpr<T>, tol: T) -> Result<AreaBracket<T>> {
    let mut prev_width = T::infinity();
    loop {
        let b = e.bracket();
        let scale = T::one().max(b.mid().abs());
        if b.width() <= tol * scale || b.width() > prev_width * T::half() {
            return Ok(b);
        }
        prev_width = b.width();
        if !e.refine(PANEL_CAP) {
            return Err(Error::ToleranceUnreachable { tol: tol.f64(), width: b.width().f64() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomfun::geometry;

    #[test]
    fn octant_is_an_eighth_of_pi() {
        let g = geometry();
        assert!(g.pi().contains(std::f64::consts::PI) || (g.pi().mid() - std::f64::consts::PI).abs() < 1e-14);
        assert!(g.pi().width() < 1e-13);
        assert!((g.ln2().mid() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn table_values() {
        let g = geometry();
        let (c, s) = g.cos_sin(std::f64::consts::PI, 1e-9).unwrap();
        assert!((c + 1.0).abs() < 1e-9 && s.abs() < 1e-9);
        let (c, s) = g.cos_sin(-std::f64::consts::FRAC_PI_2, 1e-9).unwrap();
        assert!(c.abs() < 1e-9 && (s + 1.0).abs() < 1e-9);
        assert_eq!(g.exp(0.0, 1e-9).unwrap(), 1.0);
        assert_eq!(g.cosh_sinh(0.0, 1e-9).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn reciprocal_is_exact_by_construction() {
        let g = geometry();
        assert_eq!(g.exp(-1.0, 1e-9).unwrap(), 1.0 / g.exp(1.0, 1e-9).unwrap());
    }

    #[test]
    fn halving_count() {
        assert_eq!(halvings(2.0f64), 0);
        assert_eq!(halvings(2.5f64), 1);
        assert_eq!(halvings(20.0f64), 4);
    }

    #[test]
    fn single_precision_geometry() {
        let g = Geometry::<f32>::new();
        let (c, s) = g.cos_sin(1.0, 1e-5).unwrap();
        assert!((c - 1f32.cos()).abs() < 1e-5 && (s - 1f32.sin()).abs() < 1e-5);
    }
}
