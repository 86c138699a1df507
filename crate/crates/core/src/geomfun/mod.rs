//! Transcendental functions defined by areas on three quadratic curves.
//!
//! `cos`/`sin` select the point of the unit circle whose sector has area
//! `A/2`, `cosh`/`sinh` do the same on `x² − y² = 1`, and `exp(A)` is the
//! abscissa where the area under `xy = 1` from `1` reaches `A`. Areas come
//! from rigorous brackets ([`AreaBracket`]); the only arithmetic used is
//! `+ − × ÷` and a Newton square root.

mod area;
mod functions;
mod matrix;
mod quad;
mod verify;

use std::sync::OnceLock;

pub use area::{CurveId, Solved};
pub use matrix::SumMatrix;
pub use quad::{AreaBracket, AreaExpr, CorrectedQuad};
pub use verify::{parallelogram_bound, CheckRecord, Report};

use crate::scalar::Real;

/// Default tolerance for function values.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Cached constants shared by every evaluation: the octant area `π/8`,
/// `ln 2` and an upper bound for `cosh 1`.
#[derive(Debug, Clone)]
pub struct Geometry<T> {
    octant: AreaBracket<T>,
    ln2: AreaBracket<T>,
    cosh_one: T,
}

impl<T: Real> Default for Geometry<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn tightest<T: Real>(mut e: AreaExpr<T>) -> AreaBracket<T> {
    let mut b = e.bracket();
    loop {
        if !e.refine(1 << 16) {
            return b;
        }
        let next = e.bracket();
        if next.width() > b.width() * T::half() {
            return next;
        }
        b = next;
    }
}

impl<T: Real> Geometry<T> {
    pub fn new() -> Self {
        let octant = tightest(area::circle_by_height(area::octant_height(), 8));
        let ln2 = tightest(area::skew_unit_octave(8));
        let mut g = Self { octant, ln2, cosh_one: T::one() };
        let (c, _) = g
            .cosh_sinh(T::one(), T::lit(4.0) * T::epsilon())
            .expect("cosh 1 is in the base range");
        g.cosh_one = c * (T::one() + T::lit(64.0) * T::epsilon());
        g
    }

    /// Bracket of the octant sector, `π/8`.
    pub fn octant(&self) -> AreaBracket<T> {
        self.octant
    }

    /// Bracket of `π`, eight octants.
    pub fn pi(&self) -> AreaBracket<T> {
        self.octant.scale(T::lit(8.0))
    }

    /// Bracket of `ln 2`, the area under `xy = 1` over `[1, 2]`.
    pub fn ln2(&self) -> AreaBracket<T> {
        self.ln2
    }

    /// Upper bound for `cosh 1`.
    pub fn cosh_one(&self) -> T {
        self.cosh_one
    }
}

/// Shared `f64` geometry.
pub fn geometry() -> &'static Geometry<f64> {
    static G: OnceLock<Geometry<f64>> = OnceLock::new();
    G.get_or_init(Geometry::new)
}

/// `(cos A, sin A)` with the shared geometry.
pub fn cos_sin(a: f64, tol: f64) -> crate::Result<(f64, f64)> {
    geometry().cos_sin(a, tol)
}

/// `(cosh A, sinh A)` with the shared geometry.
pub fn cosh_sinh(a: f64, tol: f64) -> crate::Result<(f64, f64)> {
    geometry().cosh_sinh(a, tol)
}

/// `exp A` with the shared geometry.
pub fn exp(a: f64, tol: f64) -> crate::Result<f64> {
    geometry().exp(a, tol)
}

/// `ln x` with the shared geometry.
pub fn ln(x: f64, tol: f64) -> crate::Result<f64> {
    geometry().ln(x, tol)
}
