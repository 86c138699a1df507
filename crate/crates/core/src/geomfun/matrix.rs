//! Area-preserving summation matrices `T_B`.

use crate::error::Result;
use crate::scalar::Real;

use super::area::CurveId;
use super::Geometry;

/// The determinant-one map carrying the region of area `A` onto the
/// region of area `A + B`: a rotation, a hyperbolic boost or a diagonal
/// scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumMatrix<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
    pub curve: CurveId,
}

impl<T: Real> SumMatrix<T> {
    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn apply(&self, (x, y): (T, T)) -> (T, T) {
        (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)
    }
}

impl<T: Real> Geometry<T> {
    /// `T_B` from the geometric function values at `B`.
    pub fn sum_matrix(&self, curve: CurveId, b: T, tol: T) -> Result<SumMatrix<T>> {
        let m = match curve {
            CurveId::Circle => {
                let (c, s) = self.cos_sin(b, tol)?;
                SumMatrix { a11: c, a12: -s, a21: s, a22: c, curve }
            }
            CurveId::Hyperbola => {
                let (c, s) = self.cosh_sinh(b, tol)?;
                SumMatrix { a11: c, a12: s, a21: s, a22: c, curve }
            }
            CurveId::SkewHyperbola => {
                let e = self.exp(b, tol)?;
                SumMatrix { a11: e, a12: T::zero(), a21: T::zero(), a22: T::one() / e, curve }
            }
        };
        Ok(m)
    }
}
