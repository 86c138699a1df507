//! Identity and inequality checks on geometric function values.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{sqrt, Real};

use super::area::CurveId;
use super::Geometry;

/// One checked relation `lhs ≈ rhs` (or `lhs ≤ rhs`) at a grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub check: String,
    pub grid_point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// `|lhs − rhs| ≤ allowed`.
    pub fn equal(check: impl Into<String>, grid_point: Vec<f64>, lhs: f64, rhs: f64, allowed: f64) -> Self {
        let residual = (lhs - rhs).abs();
        Self { check: check.into(), grid_point, lhs, rhs, residual, pass: residual <= allowed }
    }

    /// `lhs ≤ rhs + slack`; the residual is the violation, zero when it holds.
    pub fn at_most(check: impl Into<String>, grid_point: Vec<f64>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let residual = (lhs - rhs).max(0.0);
        Self { check: check.into(), grid_point, lhs, rhs, residual, pass: lhs <= rhs + slack }
    }

    pub fn to_json(&self) -> Value {
        let gp = match self.grid_point.as_slice() {
            [v] => json!(v),
            vs => json!(vs),
        };
        json!({
            "check": self.check,
            "grid_point": gp,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "pass": self.pass,
        })
    }
}

/// Collection of check records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.records.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.records.iter().map(CheckRecord::to_json).collect())
    }
}

/// Area of the parallelogram inscribed under the hyperbola that shows every
/// area is solvable: `5/(2√(9x²−1) + 3√(4x²−1)) · x/3`.
pub fn parallelogram_bound<T: Real>(x: T) -> Result<T> {
    if !(x >= T::one()) {
        return Err(Error::Domain(format!("parallelogram bound needs x >= 1, got {x}")));
    }
    let nine = T::lit(9.0);
    let four = T::lit(4.0);
    let d = T::two() * sqrt(nine * x * x - T::one()) + T::lit(3.0) * sqrt(four * x * x - T::one());
    Ok(T::lit(5.0) / d * (x / T::lit(3.0)))
}

fn rel<T: Real>(v: T) -> f64 {
    v.f64().abs().max(1.0)
}

impl<T: Real> Geometry<T> {
    /// Addition formulas at `(A, B)` computed from geometric values on both
    /// sides, plus the matrix route `T_B (f(A), g(A)) = (f(A+B), g(A+B))`.
    /// Residuals are judged against `8·tol` relative to the magnitudes.
    pub fn verify_summation(&self, curve: CurveId, a: T, b: T, tol: T) -> Result<Report> {
        let mut rep = Report::default();
        let gp = vec![a.f64(), b.f64()];
        let allowed = |v: T| 8.0 * tol.f64() * rel(v);
        let pair = |t: T| -> Result<(T, T)> {
            match curve {
                CurveId::Circle => self.cos_sin(t, tol),
                CurveId::Hyperbola => self.cosh_sinh(t, tol),
                CurveId::SkewHyperbola => {
                    let e = self.exp(t, tol)?;
                    Ok((e, T::one() / e))
                }
            }
        };
        let (fa, ga) = pair(a)?;
        let (fb, gb) = pair(b)?;
        let (fab, gab) = pair(a + b)?;
        let scale = |x: T, y: T| x.abs().max(y.abs()) * T::two();
        match curve {
            CurveId::Circle => {
                let c = fa * fb - ga * gb;
                let s = ga * fb + fa * gb;
                rep.push(CheckRecord::equal("cos(A+B) = cos A cos B - sin A sin B", gp.clone(), fab.f64(), c.f64(), allowed(T::one())));
                rep.push(CheckRecord::equal("sin(A+B) = sin A cos B + cos A sin B", gp.clone(), gab.f64(), s.f64(), allowed(T::one())));
            }
            CurveId::Hyperbola => {
                let c = fa * fb + ga * gb;
                let s = ga * fb + fa * gb;
                let m = scale(fa, fb) * scale(fa, fb);
                rep.push(CheckRecord::equal("cosh(A+B) = cosh A cosh B + sinh A sinh B", gp.clone(), fab.f64(), c.f64(), allowed(m)));
                rep.push(CheckRecord::equal("sinh(A+B) = sinh A cosh B + cosh A sinh B", gp.clone(), gab.f64(), s.f64(), allowed(m)));
            }
            CurveId::SkewHyperbola => {
                let e = fa * fb;
                rep.push(CheckRecord::equal("exp(A+B) = exp A exp B", gp.clone(), fab.f64(), e.f64(), allowed(e)));
            }
        }
        let m = self.sum_matrix(curve, b, tol)?;
        let (x, y) = m.apply((fa, ga));
        let mag = match curve {
            CurveId::Circle => T::one(),
            _ => scale(fa, ga) * scale(m.a11, m.a22),
        };
        rep.push(CheckRecord::equal(format!("T_B maps {} point at A to A+B (x)", curve.name()), gp.clone(), x.f64(), fab.f64(), allowed(mag)));
        rep.push(CheckRecord::equal(format!("T_B maps {} point at A to A+B (y)", curve.name()), gp, y.f64(), gab.f64(), allowed(mag)));
        Ok(rep)
    }

    /// The squeeze chains that make `E(A) = (f(A) − f(0) − A)/|A|` an error
    /// function, checked at every grid point in `(0, 1/2]`, together with
    /// the shrinking of `|E|` along the grid order.
    pub fn verify_deriv_zero_inequalities(&self, curve: CurveId, grid: &[T]) -> Result<Report> {
        let mut rep = Report::default();
        let eps = T::epsilon();
        let mut last_e: Option<(T, T)> = None;
        for &a in grid {
            if !(a > T::zero() && a <= T::half()) {
                return Err(Error::InvalidArgument(format!("grid point {a} outside (0, 1/2]")));
            }
            // Relative accuracy fine enough to resolve E(A) ~ A²/6.
            let tol = (a * a / T::lit(6.0) * T::lit(1e-3)).max(T::lit(4.0) * eps).min(T::lit(1e-9));
            let gp = vec![a.f64()];
            let u = T::lit(8.0) * tol + T::lit(8.0) * eps;
            let e = match curve {
                CurveId::Circle => {
                    let (x, y) = self.cos_sin(a, tol)?;
                    // cos A − 1 without cancellation
                    let cm1 = -(y * y) / (T::one() + x);
                    let lhs = a * cm1;
                    let mid = y - a;
                    let slack = u * (lhs.abs() + y.abs()) + eps * a;
                    rep.push(CheckRecord::at_most("A cos A - A <= sin A - A", gp.clone(), lhs.f64(), mid.f64(), slack.f64()));
                    rep.push(CheckRecord::at_most("sin A - A <= 0", gp.clone(), mid.f64(), 0.0, (u * y.abs()).f64()));
                    let e = mid / a;
                    let s = slack / a;
                    rep.push(CheckRecord::at_most("cos A - 1 <= E(A)", gp.clone(), cm1.f64(), e.f64(), s.f64()));
                    rep.push(CheckRecord::at_most("E(A) <= 0", gp.clone(), e.f64(), 0.0, s.f64()));
                    e
                }
                CurveId::Hyperbola => {
                    let (x, y) = self.cosh_sinh(a, tol)?;
                    let cm1 = (y * y) / (T::one() + x);
                    let lhs = a * cm1;
                    let mid = y - a;
                    let slack = u * (lhs.abs() + y.abs()) + eps * a;
                    rep.push(CheckRecord::at_most("sinh A - A <= A cosh A - A", gp.clone(), mid.f64(), lhs.f64(), slack.f64()));
                    rep.push(CheckRecord::at_most("0 <= sinh A - A", gp.clone(), 0.0, mid.f64(), (u * y.abs()).f64()));
                    let e = mid / a;
                    let s = slack / a;
                    rep.push(CheckRecord::at_most("E(A) <= cosh A - 1", gp.clone(), e.f64(), cm1.f64(), s.f64()));
                    rep.push(CheckRecord::at_most("0 <= E(A)", gp.clone(), 0.0, e.f64(), s.f64()));
                    e
                }
                CurveId::SkewHyperbola => {
                    let em1 = self.exp_m1_base(a, tol)?;
                    let mid = em1 - a;
                    let sq = em1 * em1 * T::half();
                    let slack = u * em1 + eps * a;
                    rep.push(CheckRecord::at_most("0 <= exp A - 1 - A", gp.clone(), 0.0, mid.f64(), slack.f64()));
                    rep.push(CheckRecord::at_most("exp A - 1 - A <= (exp A - 1)^2/2", gp.clone(), mid.f64(), sq.f64(), slack.f64()));
                    rep.push(CheckRecord::at_most("(exp A - 1)/2 <= A", gp.clone(), (em1 * T::half()).f64(), a.f64(), slack.f64()));
                    let e = mid / a;
                    let s = slack / a;
                    rep.push(CheckRecord::at_most("0 <= E(A)", gp.clone(), 0.0, e.f64(), s.f64()));
                    rep.push(CheckRecord::at_most("E(A) <= exp A - 1", gp.clone(), e.f64(), em1.f64(), s.f64()));
                    e
                }
            };
            let tol_e = T::lit(8.0) * tol + T::lit(8.0) * eps * T::lit(4.0);
            if let Some((prev_a, prev_e)) = last_e {
                if a < prev_a {
                    rep.push(CheckRecord::at_most("|E(A)| shrinks with A", gp.clone(), e.abs().f64(), prev_e.abs().f64(), tol_e.f64()));
                }
            }
            last_e = Some((a, e));
        }
        Ok(rep)
    }

    /// `cos² + sin² = 1`, `cosh² − sinh² = 1` or `exp A · exp(−A) = 1` on a grid.
    pub fn verify_identity(&self, curve: CurveId, grid: &[T], tol: T) -> Result<Report> {
        let mut rep = Report::default();
        for &a in grid {
            let gp = vec![a.f64()];
            match curve {
                CurveId::Circle => {
                    let (c, s) = self.cos_sin(a, tol)?;
                    rep.push(CheckRecord::equal("cos^2 + sin^2 = 1", gp, (c * c + s * s).f64(), 1.0, 1e-8));
                }
                CurveId::Hyperbola => {
                    let (c, s) = self.cosh_sinh(a, tol)?;
                    let v = (c - s) * (c + s);
                    rep.push(CheckRecord::equal("cosh^2 - sinh^2 = 1", gp, v.f64(), 1.0, 1e-8 * rel(c * c)));
                }
                CurveId::SkewHyperbola => {
                    let p = self.exp(a, tol)? * self.exp(-a, tol)?;
                    rep.push(CheckRecord::equal("exp(A) exp(-A) = 1", gp, p.f64(), 1.0, 1e-8));
                }
            }
        }
        Ok(rep)
    }

    /// Images of 32 curve points under `T_B` stay on the curve.
    pub fn verify_matrix_invariance(&self, curve: CurveId, b: T, tol: T) -> Result<Report> {
        let m = self.sum_matrix(curve, b, tol)?;
        let mut rep = Report::default();
        rep.push(CheckRecord::equal(
            format!("det T_B = 1 ({})", curve.name()),
            vec![b.f64()],
            m.det().f64(),
            1.0,
            1e-12 * rel(m.a11 * m.a22),
        ));
        for i in 0..32 {
            // points parameterized rationally, no function values needed
            let t = T::lit(-0.9 + 1.8 * i as f64 / 31.0);
            let p = match curve {
                CurveId::Circle => {
                    let d = T::one() + t * t;
                    ((T::one() - t * t) / d, T::two() * t / d)
                }
                CurveId::Hyperbola => {
                    let d = T::one() - t * t;
                    ((T::one() + t * t) / d, T::two() * t / d)
                }
                CurveId::SkewHyperbola => {
                    let x = T::lit(1.1).powi(i - 16);
                    (x, T::one() / x)
                }
            };
            let (x, y) = m.apply(p);
            let mag = (x * x).max(y * y).max(x * y).abs();
            rep.push(CheckRecord::equal(
                format!("T_B keeps {} invariant", curve.name()),
                vec![b.f64(), t.f64()],
                curve.residual(x, y).f64(),
                0.0,
                1e-9 * rel(mag),
            ));
        }
        Ok(rep)
    }

    /// Hyperbolic values from the doubling extension with `k` forced halvings
    /// agree with the direct solve.
    pub fn verify_extension_consistency(&self, grid: &[T], k: u32, tol: T) -> Result<Report> {
        let mut rep = Report::default();
        for &a in grid {
            let (c0, s0) = self.cosh_sinh_with(a, tol, 0)?;
            let (c1, s1) = self.cosh_sinh_with(a, tol, k)?;
            let allowed = 4.0 * tol.f64() * rel(c0);
            rep.push(CheckRecord::equal("cosh direct = cosh doubled", vec![a.f64()], c1.f64(), c0.f64(), allowed));
            rep.push(CheckRecord::equal("sinh direct = sinh doubled", vec![a.f64()], s1.f64(), s0.f64(), allowed));
        }
        Ok(rep)
    }

    /// The area under `xy = 1` over `[x0, 1]`, integrated directly, equals
    /// minus the signed area used by the reflection `exp(−A) = 1/exp A`.
    pub fn verify_reflection_region(&self, grid: &[T], tol: T) -> Result<Report> {
        let mut rep = Report::default();
        for &a in grid {
            let x0 = T::one() / self.exp(a, tol)?;
            let mut direct = super::area::skew_between(x0, T::one(), 8);
            let d = direct
                .refine_to(tol, super::area::PANEL_CAP)
                .ok_or(Error::ToleranceUnreachable { tol: tol.f64(), width: direct.bracket().width().f64() })?;
            let signed = self.sector_area(CurveId::SkewHyperbola, x0, tol)?;
            let allowed = (d.width() + signed.width()).f64() + 4.0 * tol.f64();
            rep.push(CheckRecord::equal("area over [1/exp A, 1] = A", vec![a.f64()], d.mid().f64(), a.f64(), allowed + 4.0 * tol.f64()));
            rep.push(CheckRecord::equal("direct region = reflected region", vec![a.f64()], d.mid().f64(), (-signed.mid()).f64(), allowed));
        }
        Ok(rep)
    }

    /// Values at the multiples of `π/4` against their closed forms.
    pub fn verify_table(&self, tol: T) -> Result<Report> {
        let mut rep = Report::default();
        let r = sqrt(T::half());
        let z = T::zero();
        let one = T::one();
        let table = [(0.0, one, z), (0.25, r, r), (0.5, z, one), (0.75, -r, r), (1.0, -one, z)];
        for (frac, c, s) in table {
            let a = T::lit(std::f64::consts::PI * frac);
            let (gc, gs) = self.cos_sin(a, tol)?;
            rep.push(CheckRecord::equal(format!("cos({frac} pi)"), vec![a.f64()], gc.f64(), c.f64(), 1e-8));
            rep.push(CheckRecord::equal(format!("sin({frac} pi)"), vec![a.f64()], gs.f64(), s.f64(), 1e-8));
        }
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallelogram_at_one() {
        let v = parallelogram_bound(1.0f64).unwrap();
        let closed = 5.0 / (2.0 * 8f64.sqrt() + 3.0 * 3f64.sqrt()) / 3.0;
        assert!((v - closed).abs() < 1e-15);
        assert!(parallelogram_bound(0.5f64).is_err());
    }

    #[test]
    fn record_json_shape() {
        let r = CheckRecord::equal("x", vec![0.5], 1.0, 1.0, 0.0);
        let v = r.to_json();
        assert_eq!(v["grid_point"], json!(0.5));
        assert_eq!(v["pass"], json!(true));
    }
}
