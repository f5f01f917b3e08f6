//! Exact Gaussian-rational scalars.
//!
//! All symbolic coefficients in this crate are complex numbers whose real and
//! imaginary parts are arbitrary-precision rationals. No floating point ever
//! enters the symbolic kernel; floats appear only at numeric-evaluation time.

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub type Rational = BigRational;

/// Build a rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        Self::new(Rational::one(), Rational::zero())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(ratio(n, 1), Rational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(ratio(num, den), Rational::zero())
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::new(r, Rational::zero())
    }

    /// `(re + im*i)` with both parts given as integer ratios.
    pub fn from_parts(re: (i64, i64), im: (i64, i64)) -> Self {
        Self::new(ratio(re.0, re.1), ratio(im.0, im.1))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn mul_i(&self) -> Self {
        Self::new(-self.im.clone(), self.re.clone())
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        let norm = &self.re * &self.re + &self.im * &self.im;
        assert!(!norm.is_zero(), "division by zero GaussRational");
        Self::new(&self.re / &norm, -(&self.im / &norm))
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().expect("rational out of f64 range"),
            self.im.to_f64().expect("rational out of f64 range"),
        )
    }
}

impl Add<&GaussRational> for &GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&GaussRational> for &GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&GaussRational> for &GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re, -self.im)
    }
}

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, rhs: &GaussRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, rhs: &GaussRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&GaussRational> for GaussRational {
    fn mul_assign(&mut self, rhs: &GaussRational) {
        let out = &*self * rhs;
        *self = out;
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    /// Prints in the expression grammar: `3/16`, `-2`, `i`, `-1/4*i`,
    /// `(1/2+1/3*i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        if self.re.is_zero() {
            if self.im.is_one() {
                return write!(f, "i");
            }
            if (-self.im.clone()).is_one() {
                return write!(f, "-i");
            }
            return write!(f, "{}*i", fmt_rational(&self.im));
        }
        let im_abs = self.im.abs();
        let sign = if self.im.is_negative() { '-' } else { '+' };
        if im_abs.is_one() {
            write!(f, "({}{}i)", fmt_rational(&self.re), sign)
        } else {
            write!(f, "({}{}{}*i)", fmt_rational(&self.re), sign, fmt_rational(&im_abs))
        }
    }
}

/// Best rational approximation to `x` with denominator at most `max_den`,
/// via continued fractions. Used when deriving structure constants from
/// floating-point matrix representations.
pub fn rationalize(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        panic!("cannot rationalize non-finite value");
    }
    let neg = x < 0.0;
    let mut x = x.abs();
    // Convergents p/q of the continued fraction expansion.
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = x.floor();
        if a > i64::MAX as f64 {
            break;
        }
        let a_int = a as i128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let num = if neg { -p1 } else { p1 };
    BigRational::new(BigInt::from(num), BigInt::from(q1.max(1)))
}
