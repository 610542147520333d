//! Double-double arithmetic (~31 significant digits).
//!
//! The outside-light-cone rapidity integrals suffer cancellation that can
//! amplify roundoff by factors up to e^{pi*alpha/2} (~e^47 at alpha = 30), far
//! beyond what f64 can absorb.  A double-double accumulator keeps ~1e-32
//! relative roundoff, leaving ample headroom after amplification.  Only the
//! operations the tilted-contour trapezoid needs are implemented.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// ln 2 to double-double precision.
    pub const LN2: Dd = Dd {
        hi: 0.693_147_180_559_945_3,
        lo: 2.319_046_813_846_299_6e-17,
    };
    /// pi/2 to double-double precision.
    pub const FRAC_PI_2: Dd = Dd {
        hi: 1.570_796_326_794_896_6,
        lo: 6.123_233_995_736_766e-17,
    };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_pwr2(self, p: f64) -> Dd {
        // p must be a power of two
        Dd::new(self.hi * p, self.lo * p)
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn sqr(self) -> Dd {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (s, t) = quick_two_sum(p, e);
        Dd::new(s, t)
    }

    /// exp(x) by argument reduction exp(x) = 2^m exp(r)^(2^k), Taylor on r.
    pub fn exp(self) -> Dd {
        let x = self;
        if x.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if x.hi < -745.0 {
            return Dd::ZERO;
        }
        let m = (x.hi / std::f64::consts::LN_2).round();
        let r = (x - Dd::LN2 * Dd::from_f64(m)).mul_pwr2(1.0 / 512.0);
        // Taylor of exp(r) - 1 on |r| <= ln2/1024
        let mut term = r;
        let mut sum = r;
        for k in 2..=10 {
            term = term * r / Dd::from_f64(k as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        // undo the 2^9 squarings of (1 + s): s <- 2 s + s^2
        let mut s = sum;
        for _ in 0..9 {
            s = s.mul_pwr2(2.0) + s.sqr();
        }
        let e = s + Dd::ONE;
        let scale = libm_exp2(m);
        Dd::new(e.hi * scale, e.lo * scale)
    }

    /// Simultaneous sin and cos with reduction modulo pi/2.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let x = self;
        let j = (x.to_f64() / std::f64::consts::FRAC_PI_2).round();
        // |j| stays below ~2^40 in practice, so j * (pi/2) is exact in dd
        // to well under the target precision
        let r = x - Dd::FRAC_PI_2 * Dd::from_f64(j);
        let (s, c) = sin_cos_taylor(r);
        match (j as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    /// Simultaneous sinh and cosh from the exponential.
    pub fn sinh_cosh(self) -> (Dd, Dd) {
        let e = self.exp();
        let ei = e.recip();
        (
            (e - ei).mul_pwr2(0.5),
            (e + ei).mul_pwr2(0.5),
        )
    }
}

#[inline]
fn libm_exp2(m: f64) -> f64 {
    // m is integral and within f64 exponent range after the guards in exp()
    f64::powi(2.0, m as i32)
}

fn sin_cos_taylor(r: Dd) -> (Dd, Dd) {
    // |r| <= pi/4
    let r2 = r.sqr();
    let mut s = r;
    let mut term = r;
    let mut k = 1.0;
    loop {
        term = -(term * r2) / Dd::from_f64((k + 1.0) * (k + 2.0));
        s = s + term;
        k += 2.0;
        if term.hi.abs() < 1e-35 * (s.hi.abs() + 1e-300) || k > 40.0 {
            break;
        }
    }
    let mut c = Dd::ONE;
    let mut term = Dd::ONE;
    let mut k = 0.0;
    loop {
        term = -(term * r2) / Dd::from_f64((k + 1.0) * (k + 2.0));
        c = c + term;
        k += 2.0;
        if term.hi.abs() < 1e-35 * (c.hi.abs() + 1e-300) || k > 40.0 {
            break;
        }
    }
    (s, c)
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (s1, s2) = quick_two_sum(s1, s2 + t2);
        Dd::new(s1, s2)
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
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (s1, s2) = quick_two_sum(p1, p2);
        Dd::new(s1, s2)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s1, s2) = quick_two_sum(q1, q2);
        Dd::new(s1, s2) + Dd::from_f64(q3)
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    #[inline]
    pub fn new(re: Dd, im: Dd) -> Cdd {
        Cdd { re, im }
    }

    #[inline]
    pub fn from_f64(re: f64, im: f64) -> Cdd {
        Cdd::new(Dd::from_f64(re), Dd::from_f64(im))
    }

    #[inline]
    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// exp(z) for complex z; magnitude from the real part, phase reduced in dd.
    pub fn exp(self) -> Cdd {
        let mag = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Cdd::new(mag * c, mag * s)
    }

    #[inline]
    pub fn scale(self, k: Dd) -> Cdd {
        Cdd::new(self.re * k, self.im * k)
    }
}

impl Add for Cdd {
    type Output = Cdd;
    #[inline]
    fn add(self, rhs: Cdd) -> Cdd {
        Cdd::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    #[inline]
    fn sub(self, rhs: Cdd) -> Cdd {
        Cdd::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    #[inline]
    fn mul(self, rhs: Cdd) -> Cdd {
        Cdd::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Neg for Cdd {
    type Output = Cdd;
    #[inline]
    fn neg(self) -> Cdd {
        Cdd::new(-self.re, -self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd_close(a: Dd, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn arithmetic_recovers_cancelled_bits() {
        let a = Dd::from_f64(1.0) + Dd::from_f64(1e-25);
        let b = a - Dd::from_f64(1.0);
        assert!((b.to_f64() - 1e-25).abs() < 1e-40);
    }

    #[test]
    fn division_round_trip() {
        let a = Dd::from_f64(3.0).recip();
        let b = a * Dd::from_f64(3.0) - Dd::ONE;
        assert!(b.to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_matches_f64_and_identities() {
        for &x in &[0.0, 1.0, -1.0, 10.0, -37.5, 123.456, -200.0] {
            let e = Dd::from_f64(x).exp();
            assert!(dd_close(e, x.exp(), 1e-14), "exp({x})");
            // exp(x) * exp(-x) = 1 to dd precision
            let prod = e * Dd::from_f64(-x).exp() - Dd::ONE;
            assert!(prod.to_f64().abs() < 1e-29, "exp identity at {x}");
        }
    }

    #[test]
    fn exp_beats_f64_precision() {
        // exp(ln 2 * 100) = 2^100 exactly
        let x = Dd::LN2 * Dd::from_f64(100.0);
        let e = x.exp();
        let exact = 2f64.powi(100);
        assert!(((e.hi - exact) + e.lo).abs() / exact < 1e-30);
    }

    #[test]
    fn sin_cos_identities() {
        for &x in &[0.0, 0.5, 1.0, 3.0, -7.25, 100.0, 12345.678, -3.1e4] {
            let (s, c) = Dd::from_f64(x).sin_cos();
            assert!(dd_close(s, x.sin(), 1e-12), "sin({x})");
            assert!(dd_close(c, x.cos(), 1e-12), "cos({x})");
            let one = s.sqr() + c.sqr() - Dd::ONE;
            assert!(one.to_f64().abs() < 1e-29, "pythagoras at {x}");
        }
    }

    #[test]
    fn sinh_cosh_identity() {
        for &x in &[0.0, 0.3, -2.0, 8.0, -20.0] {
            let (sh, ch) = Dd::from_f64(x).sinh_cosh();
            assert!(dd_close(sh, x.sinh(), 1e-13));
            assert!(dd_close(ch, x.cosh(), 1e-13));
            // the difference amplifies dd rounding by ch^2
            let one = ch.sqr() - sh.sqr() - Dd::ONE;
            let scale = ch.to_f64() * ch.to_f64();
            assert!(one.to_f64().abs() < 1e-28 * scale, "hyperbolic identity at {x}");
        }
    }

    #[test]
    fn complex_exp_unit_modulus() {
        let z = Cdd::from_f64(0.0, 54321.123);
        let e = z.exp();
        let m = (e.re.sqr() + e.im.sqr()).to_f64();
        assert!((m - 1.0).abs() < 1e-28);
    }
}
