//! Scalar abstraction shared by every engine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating point scalar the engines are generic over (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossless-enough conversion of an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_(v: usize) -> Self {
        Self::from_usize(v).expect("integer representable in scalar type")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp = self.comp + ((self.sum - t) + v);
        } else {
            self.comp = self.comp + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut s = Self::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// `base^k` for a non-negative integer exponent by repeated squaring.
pub fn powu<T: Real>(base: T, mut k: u32) -> T {
    let mut acc = T::one();
    let mut b = base;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * b;
        }
        b = b * b;
        k >>= 1;
    }
    acc
}

/// `base^k` for any integer exponent.
pub fn powi<T: Real>(base: T, k: i64) -> T {
    if k >= 0 {
        powu(base, k as u32)
    } else {
        T::one() / powu(base, k.unsigned_abs() as u32)
    }
}

/// Square root by Newton iteration from an exponent-halving seed.
///
/// Returns NaN for negative input.
pub fn sqrt<T: Real>(s: T) -> T {
    if s.is_nan() || s < T::zero() {
        return T::nan();
    }
    if s == T::zero() || s.is_infinite() {
        return s;
    }
    let (mantissa, exp, _) = s.integer_decode();
    // s = mantissa * 2^exp; seed 2^(bits/2) is within a factor 2 of the root.
    let bits = exp as i32 + (64 - mantissa.leading_zeros() as i32);
    let mut g = powi(T::two(), (bits / 2) as i64);
    if g == T::zero() || g.is_infinite() {
        g = s;
    }
    let half = T::half();
    // after one step the iterate sits above the root and decreases monotonically
    g = half * (g + s / g);
    for _ in 0..64 {
        let next = half * (g + s / g);
        if next >= g {
            break;
        }
        g = next;
    }
    // one last polish, keep whichever is closer
    let alt = half * (g + s / g);
    if (alt * alt - s).abs() < (g * g - s).abs() {
        alt
    } else {
        g
    }
}

/// Positive real `n`-th root of `s > 0` by safeguarded Newton iteration.
pub fn nth_root<T: Real>(s: T, n: u32) -> T {
    assert!(n >= 1);
    if n == 1 || s == T::zero() || s.is_nan() || s.is_infinite() {
        return s;
    }
    if n == 2 {
        return sqrt(s);
    }
    if s < T::zero() {
        return T::nan();
    }
    // bracket [lo, hi] with lo^n <= s <= hi^n
    let (mut lo, mut hi) = if s >= T::one() { (T::one(), s) } else { (s, T::one()) };
    let nt = T::from_u32(n).unwrap();
    let (mantissa, exp, _) = s.integer_decode();
    let bits = exp as i64 + (64 - mantissa.leading_zeros() as i64);
    let mut g = powi(T::two(), bits / n as i64);
    if !(g > lo && g < hi) {
        g = (lo + hi) * T::half();
    }
    for _ in 0..200 {
        let gn1 = powu(g, n - 1);
        let f = gn1 * g - s;
        if f == T::zero() {
            return g;
        }
        if f > T::zero() {
            hi = g;
        } else {
            lo = g;
        }
        let mut next = g - f / (nt * gn1);
        if !(next > lo && next < hi) {
            next = (lo + hi) * T::half();
        }
        if next == g || hi - lo <= T::epsilon() * hi {
            return next;
        }
        g = next;
    }
    g
}
