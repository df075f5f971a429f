//! Minimal double-double arithmetic (an unevaluated sum `hi + lo` of two
//! doubles, about 106 bits) for the scattering coefficients, whose
//! identities cancel to `1/|α|²` relative when the transmission is small.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    pub(crate) const fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub(crate) fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }

    pub(crate) fn div_f64(self, rhs: f64) -> Self {
        self.div(Dd::new(rhs))
    }

    /// One Newton correction on the double square root.
    pub(crate) fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(self.hi.max(0.0).sqrt());
        }
        let s = self.hi.sqrt();
        let r = self - Dd::new(s) * s;
        Dd::new(s) + Dd::new(r.to_f64() / (2.0 * s))
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, rhs: f64) -> Dd {
        let (p, e) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p, e + self.lo * rhs);
        Dd { hi, lo }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct DdComplex {
    pub(crate) re: Dd,
    pub(crate) im: Dd,
}

impl DdComplex {
    pub(crate) fn from_complex(z: Complex64) -> Self {
        Self {
            re: Dd::new(z.re),
            im: Dd::new(z.im),
        }
    }

    pub(crate) fn real(x: f64) -> Self {
        Self {
            re: Dd::new(x),
            im: Dd::default(),
        }
    }

    pub(crate) fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub(crate) fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub(crate) fn inv(self) -> Self {
        let d = self.norm_sqr();
        Self {
            re: self.re.div(d),
            im: (-self.im).div(d),
        }
    }

    pub(crate) fn div(self, rhs: Self) -> Self {
        self * rhs.inv()
    }

    pub(crate) fn div_f64(self, rhs: f64) -> Self {
        Self {
            re: self.re.div_f64(rhs),
            im: self.im.div_f64(rhs),
        }
    }

    pub(crate) fn div_dd(self, rhs: Dd) -> Self {
        Self {
            re: self.re.div(rhs),
            im: self.im.div(rhs),
        }
    }

    pub(crate) fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.inv() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = DdComplex::real(1.0);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    fn add(self, rhs: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for DdComplex {
    type Output = DdComplex;
    fn sub(self, rhs: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Neg for DdComplex {
    type Output = DdComplex;
    fn neg(self) -> DdComplex {
        DdComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    fn mul(self, rhs: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl Mul<f64> for DdComplex {
    type Output = DdComplex;
    fn mul(self, rhs: f64) -> DdComplex {
        DdComplex {
            re: self.re * rhs,
            im: self.im * rhs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_double() {
        let third = Dd::new(1.0).div_f64(3.0);
        let back = third * 3.0 - Dd::new(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        // (1 + 2^-60)² - 1 is invisible in double precision
        let x = Dd::new(1.0) + Dd::new(2f64.powi(-60));
        let y = x * x - Dd::new(1.0);
        assert!((y.to_f64() - 2f64.powi(-59)).abs() < 1e-30);
        let r = Dd::new(2.0).sqrt();
        assert!((r * r - Dd::new(2.0)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn complex_inverse_and_powers() {
        let z = DdComplex::from_complex(Complex64::new(0.6, 0.8));
        let one = z * z.inv();
        assert!((one.to_complex() - 1.0).norm() < 1e-30);
        let p = z.powi(7) * z.powi(-7);
        assert!((p.to_complex() - 1.0).norm() < 1e-29);
        let q = DdComplex::real(1.0).div(z);
        assert!((q.to_complex() - Complex64::new(0.6, -0.8)).norm() < 1e-16);
    }
}
