//! Double-double arithmetic: an unevaluated sum hi + lo of two f64s giving
//! roughly 32 significant digits.
//!
//! The interpolation lab needs it: barycentric sums over exponentially
//! clustered nodes cancel through up to ~e^50 of dynamic range off the node
//! axis, which eats all 16 digits of plain f64 long before n reaches 100.
//! Everything here follows the classic error-free transforms (two_sum,
//! two_prod via fma); division and the transcendentals are one Newton step
//! on top of an f64 seed, which squares the seed's accuracy.

use crate::C64;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// |a| >= |b| is NOT required.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Requires |a| >= |b| (or a == 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub(crate) const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// The exact difference of two f64s.
    #[inline]
    pub fn diff(a: f64, b: f64) -> Self {
        let (s, e) = two_sum(a, -b);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// One dd Newton step on top of the f64 square root.
    #[cfg(test)]
    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        let y = self.hi.sqrt();
        // y + (a - y^2) / (2y)
        let y_dd = Dd::from_f64(y);
        y_dd + (self - y_dd * y_dd) / (Dd::from_f64(2.0 * y))
    }

    /// exp via argument reduction x = k ln2 + r and a Taylor tail in dd.
    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - LN2 * Dd::from_f64(k);
        // |r| <= ln2/2; r^m/m! < 1e-34 by m = 26
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for m in 1..=26 {
            term = term * r / Dd::from_f64(m as f64);
            sum = sum + term;
        }
        Dd {
            hi: ldexp(sum.hi, k as i32),
            lo: ldexp(sum.lo, k as i32),
        }
    }

    /// One dd Newton step (y += a e^{-y} - 1) on top of the f64 log.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from_f64(if self.hi == 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            });
        }
        let y0 = Dd::from_f64(self.hi.ln());
        y0 + self * (-y0).exp() - Dd::ONE
    }

    /// x^d for x >= 0, d an exact f64 exponent.
    pub fn powf(x: f64, d: f64) -> Self {
        if x == 0.0 {
            return if d == 0.0 {
                Dd::ONE
            } else if d > 0.0 {
                Dd::ZERO
            } else {
                Dd::from_f64(f64::INFINITY)
            };
        }
        (Dd::from_f64(x).ln() * Dd::from_f64(d)).exp()
    }
}

/// Scale by 2^k exactly.
#[inline]
fn ldexp(x: f64, k: i32) -> f64 {
    x * f64::from_bits((((1023 + k) as u64) << 52) as u64)
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (tl, te) = two_sum(self.lo, rhs.lo);
        let (s2, e2) = quick_two_sum(s, e + tl);
        let (hi, lo) = quick_two_sum(s2, e2 + te);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        // Three corrected f64 quotients (the classic long-division scheme).
        let q1 = self.hi / rhs.hi;
        let mut r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        Dd::new(q1, q2) + Dd::from_f64(q3)
    }
}

/// Complex double-double.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    #[inline]
    pub fn from_c64(z: C64) -> Self {
        Cdd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    #[inline]
    pub fn from_dd(re: Dd) -> Self {
        Cdd { re, im: Dd::ZERO }
    }

    #[inline]
    pub fn to_c64(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for Cdd {
    type Output = Cdd;
    #[inline]
    fn add(self, rhs: Cdd) -> Cdd {
        Cdd {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    #[inline]
    fn sub(self, rhs: Cdd) -> Cdd {
        Cdd {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    #[inline]
    fn mul(self, rhs: Cdd) -> Cdd {
        Cdd {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl Div for Cdd {
    type Output = Cdd;
    #[inline]
    fn div(self, rhs: Cdd) -> Cdd {
        let den = rhs.re * rhs.re + rhs.im * rhs.im;
        Cdd {
            re: (self.re * rhs.re + self.im * rhs.im) / den,
            im: (self.im * rhs.re - self.re * rhs.im) / den,
        }
    }
}
