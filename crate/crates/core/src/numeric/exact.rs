//! Exact arithmetic in the cyclotomic field Q(ω), ω = e^{iπ/4}.
//!
//! Elements are stored as `c0 + c1·ω + c2·ω² + c3·ω³` with rational
//! coefficients. Since ω⁴ = −1 this representation is canonical, so
//! structural equality is field equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    c: [BigRational; 4],
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl ExactComplex {
    pub fn new(c0: BigRational, c1: BigRational, c2: BigRational, c3: BigRational) -> Self {
        ExactComplex {
            c: [c0, c1, c2, c3],
        }
    }

    pub fn from_coeffs(c: [BigRational; 4]) -> Self {
        ExactComplex { c }
    }

    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        ExactComplex {
            c: [r, BigRational::zero(), BigRational::zero(), BigRational::zero()],
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(ratio(n, d))
    }

    /// ω^k for any integer k (reduced mod 8).
    pub fn omega_pow(k: i64) -> Self {
        let k = k.rem_euclid(8) as usize;
        let mut c = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        if k < 4 {
            c[k] = BigRational::one();
        } else {
            c[k - 4] = -BigRational::one();
        }
        ExactComplex { c }
    }

    pub fn omega() -> Self {
        Self::omega_pow(1)
    }

    /// The imaginary unit, ω².
    pub fn i() -> Self {
        Self::omega_pow(2)
    }

    /// √2 = ω − ω³.
    pub fn sqrt2() -> Self {
        Self::omega_pow(1) - Self::omega_pow(3)
    }

    /// i^e for e taken mod 4.
    pub fn i_pow(e: i64) -> Self {
        Self::omega_pow(2 * e.rem_euclid(4))
    }

    pub fn coeffs(&self) -> &[BigRational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    /// Returns the rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.c[1..].iter().all(Zero::is_zero) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    /// Galois automorphism ω ↦ ω^k (k odd).
    pub fn galois(&self, k: i64) -> Self {
        debug_assert!(k.rem_euclid(2) == 1);
        let mut out = Self::zero();
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            out = out + Self::omega_pow(k * j as i64).scale(cj);
        }
        out
    }

    /// Complex conjugate (the automorphism ω ↦ ω⁷).
    pub fn conj(&self) -> Self {
        self.galois(7)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        ExactComplex {
            c: [
                &self.c[0] * r,
                &self.c[1] * r,
                &self.c[2] * r,
                &self.c[3] * r,
            ],
        }
    }

    /// Field norm down to Q: the product of all four Galois conjugates.
    pub fn norm(&self) -> BigRational {
        let prod = self.galois(1) * self.galois(3) * self.galois(5) * self.galois(7);
        prod.as_rational()
            .cloned()
            .expect("norm of an element of Q(ω) is rational")
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let others = self.galois(3) * self.galois(5) * self.galois(7);
        let n = (self.clone() * others.clone())
            .as_rational()
            .cloned()
            .expect("norm is rational");
        Some(others.scale(&n.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self.clone() * r)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Returns `e` such that `self = i^e`, if any.
    pub fn is_power_of_i(&self) -> Option<u8> {
        (0..4u8).find(|&e| *self == Self::i_pow(e as i64))
    }

    /// Minimal k ≤ 8 with self^k = 1. The only roots of unity in Q(ω) are
    /// the powers of ω, so this is a complete test.
    pub fn root_of_unity_order(&self) -> Option<u32> {
        let mut acc = self.clone();
        for k in 1..=8u32 {
            if acc.is_one() {
                return Some(k);
            }
            acc = acc * self.clone();
        }
        None
    }

    pub fn to_complex(&self) -> Complex64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        let (c0, c1, c2, c3) = (f(&self.c[0]), f(&self.c[1]), f(&self.c[2]), f(&self.c[3]));
        Complex64::new(c0 + h * (c1 - c3), c2 + h * (c1 + c3))
    }
}

impl Add for ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.c;
        let [b0, b1, b2, b3] = rhs.c;
        ExactComplex {
            c: [a0 + b0, a1 + b1, a2 + b2, a3 + b3],
        }
    }
}

impl Sub for ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.c;
        let [b0, b1, b2, b3] = rhs.c;
        ExactComplex {
            c: [a0 - b0, a1 - b1, a2 - b2, a3 - b3],
        }
    }
}

impl Neg for ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> Self {
        let [a0, a1, a2, a3] = self.c;
        ExactComplex {
            c: [-a0, -a1, -a2, -a3],
        }
    }
}

impl Mul for ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: Self) -> Self {
        if self.is_one() {
            return rhs;
        }
        if rhs.is_one() {
            return self;
        }
        let mut out = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let p = a * b;
                let k = i + j;
                if k < 4 {
                    out[k] += p;
                } else {
                    out[k - 4] -= p;
                }
            }
        }
        ExactComplex { c: out }
    }
}

impl fmt::Debug for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "w", "w^2", "w^3"];
        let mut first = true;
        for (k, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if k == 0 {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", names[k])?;
            } else {
                write!(f, "{}*{}", mag, names[k])?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
