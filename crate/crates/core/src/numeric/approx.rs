use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Double-precision complex value, used where exact values leave Q(ω).
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ApproxComplex(pub Complex64);

impl ApproxComplex {
    pub fn new(re: f64, im: f64) -> Self {
        ApproxComplex(Complex64::new(re, im))
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn is_finite(&self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

impl From<Complex64> for ApproxComplex {
    fn from(z: Complex64) -> Self {
        ApproxComplex(z)
    }
}

impl Add for ApproxComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ApproxComplex(self.0 + rhs.0)
    }
}

impl Sub for ApproxComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ApproxComplex(self.0 - rhs.0)
    }
}

impl Mul for ApproxComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        ApproxComplex(self.0 * rhs.0)
    }
}

impl Neg for ApproxComplex {
    type Output = Self;
    fn neg(self) -> Self {
        ApproxComplex(-self.0)
    }
}

impl fmt::Debug for ApproxComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ApproxComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im == 0.0 {
            write!(f, "{}", self.0.re)
        } else if self.0.im < 0.0 {
            write!(f, "{}-{}i", self.0.re, -self.0.im)
        } else {
            write!(f, "{}+{}i", self.0.re, self.0.im)
        }
    }
}
