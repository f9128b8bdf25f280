//! Scalar arithmetic: exact elements of Q(ω) and double-precision complex
//! values, unified behind the [`Field`] trait.
//!
//! A whole instance lives in a single mode. Generic code is written against
//! [`Field`]; the dynamically tagged [`Scalar`] exists for I/O and for
//! callers that must decide the mode at runtime.

mod approx;
mod exact;
pub mod roots;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use approx::ApproxComplex;
pub use exact::ExactComplex;

/// Default relative tolerance in approximate mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Largest order searched by the approximate root-of-unity test.
pub const DEFAULT_MAX_ROOT_ORDER: u32 = 360;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Approx => write!(f, "approx"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("mode mismatch: {0} value used where {1} was required")]
    ModeMismatch(Mode, Mode),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite value produced")]
    NonFinite,
}

/// Tolerances governing approximate-mode tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub max_root_order: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: DEFAULT_TOLERANCE,
            max_root_order: DEFAULT_MAX_ROOT_ORDER,
        }
    }
}

/// Operations shared by the exact and approximate scalar types.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(n: i64, d: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn inv(&self) -> Option<Self>;
    /// ω^k with ω = e^{iπ/4}.
    fn omega_pow(k: i64) -> Self;
    fn to_complex(&self) -> Complex64;
    fn to_scalar(&self) -> Scalar;
    fn from_scalar(s: &Scalar) -> Result<Self, NumericError>;
    /// Minimal k with self^k = 1. Exact mode searches k ≤ 8, approximate
    /// mode k ≤ `tol.max_root_order` within `tol.rel`.
    fn root_of_unity_order(&self, tol: &Tolerance) -> Option<u32>;
    /// Equality up to `tol` in approximate mode, exact equality otherwise.
    fn close_to(&self, other: &Self, tol: f64) -> bool;
    /// l-th roots of `self` available in this mode, principal branch first.
    fn nth_roots(&self, l: u32) -> Vec<Self>;

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self.clone() * r)
    }

    fn i() -> Self {
        Self::omega_pow(2)
    }

    fn sqrt2() -> Self {
        Self::omega_pow(1) - Self::omega_pow(3)
    }

    fn pow(&self, mut e: u64) -> Self {
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

    fn is_finite(&self) -> bool {
        true
    }
}

impl Field for ExactComplex {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        ExactComplex::zero()
    }
    fn one() -> Self {
        ExactComplex::one()
    }
    fn from_int(v: i64) -> Self {
        ExactComplex::from_int(v)
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        ExactComplex::from_ratio(n, d)
    }
    fn is_zero(&self) -> bool {
        ExactComplex::is_zero(self)
    }
    fn is_one(&self) -> bool {
        ExactComplex::is_one(self)
    }
    fn inv(&self) -> Option<Self> {
        ExactComplex::inv(self)
    }
    fn omega_pow(k: i64) -> Self {
        ExactComplex::omega_pow(k)
    }
    fn to_complex(&self) -> Complex64 {
        ExactComplex::to_complex(self)
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }
    fn from_scalar(s: &Scalar) -> Result<Self, NumericError> {
        match s {
            Scalar::Exact(e) => Ok(e.clone()),
            Scalar::Approx(_) => Err(NumericError::ModeMismatch(Mode::Approx, Mode::Exact)),
        }
    }
    fn root_of_unity_order(&self, _tol: &Tolerance) -> Option<u32> {
        ExactComplex::root_of_unity_order(self)
    }
    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn nth_roots(&self, l: u32) -> Vec<Self> {
        roots::exact_roots(self, l)
    }
    fn pow(&self, e: u64) -> Self {
        ExactComplex::pow(self, e)
    }
}

impl Field for ApproxComplex {
    const MODE: Mode = Mode::Approx;

    fn zero() -> Self {
        ApproxComplex::new(0.0, 0.0)
    }
    fn one() -> Self {
        ApproxComplex::new(1.0, 0.0)
    }
    fn from_int(v: i64) -> Self {
        ApproxComplex::new(v as f64, 0.0)
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        ApproxComplex::new(n as f64 / d as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }
    fn is_one(&self) -> bool {
        self.0.re == 1.0 && self.0.im == 0.0
    }
    fn inv(&self) -> Option<Self> {
        if Field::is_zero(self) {
            None
        } else {
            Some(ApproxComplex(self.0.inv()))
        }
    }
    fn omega_pow(k: i64) -> Self {
        let theta = std::f64::consts::FRAC_PI_4 * k.rem_euclid(8) as f64;
        // exact quadrant values keep i, -1 etc. free of rounding noise
        let (s, c) = match k.rem_euclid(8) {
            0 => (0.0, 1.0),
            2 => (1.0, 0.0),
            4 => (0.0, -1.0),
            6 => (-1.0, 0.0),
            _ => theta.sin_cos(),
        };
        ApproxComplex::new(c, s)
    }
    fn to_complex(&self) -> Complex64 {
        self.0
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::Approx(*self)
    }
    fn from_scalar(s: &Scalar) -> Result<Self, NumericError> {
        Ok(ApproxComplex(s.to_complex()))
    }
    fn root_of_unity_order(&self, tol: &Tolerance) -> Option<u32> {
        let z = self.0;
        if (z.norm() - 1.0).abs() > tol.rel.max(1e-12) {
            return None;
        }
        let mut acc = z;
        for k in 1..=tol.max_root_order {
            if (acc - Complex64::new(1.0, 0.0)).norm() < tol.rel {
                return Some(k);
            }
            acc *= z;
        }
        None
    }
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        let scale = self.0.norm().max(other.0.norm()).max(1.0);
        (self.0 - other.0).norm() <= tol * scale
    }
    fn nth_roots(&self, l: u32) -> Vec<Self> {
        if l == 1 {
            return vec![*self];
        }
        let r = self.0.norm().powf(1.0 / l as f64);
        let arg = self.0.arg();
        (0..l)
            .map(|b| {
                let t = (arg + 2.0 * std::f64::consts::PI * b as f64) / l as f64;
                ApproxComplex(Complex64::from_polar(r, t))
            })
            .collect()
    }
    fn is_finite(&self) -> bool {
        ApproxComplex::is_finite(self)
    }
}

/// A scalar tagged with its mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(ExactComplex),
    Approx(ApproxComplex),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Approx(_) => Mode::Approx,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(e) => e.to_complex(),
            Scalar::Approx(a) => a.0,
        }
    }

    /// Exact → approximate conversion; total.
    pub fn to_approx(&self) -> Scalar {
        Scalar::Approx(ApproxComplex(self.to_complex()))
    }

    fn checked(a: ApproxComplex) -> Result<Scalar, NumericError> {
        if a.is_finite() {
            Ok(Scalar::Approx(a))
        } else {
            Err(NumericError::NonFinite)
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Result<Scalar, NumericError> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.clone() + b.clone())),
            (Scalar::Approx(a), Scalar::Approx(b)) => Self::checked(*a + *b),
            _ => Err(NumericError::ModeMismatch(rhs.mode(), self.mode())),
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Result<Scalar, NumericError> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.clone() * b.clone())),
            (Scalar::Approx(a), Scalar::Approx(b)) => Self::checked(*a * *b),
            _ => Err(NumericError::ModeMismatch(rhs.mode(), self.mode())),
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar, NumericError> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a
                .checked_div(b)
                .map(Scalar::Exact)
                .ok_or(NumericError::DivisionByZero),
            (Scalar::Approx(a), Scalar::Approx(b)) => {
                let q = Field::checked_div(a, b).ok_or(NumericError::DivisionByZero)?;
                Self::checked(q)
            }
            _ => Err(NumericError::ModeMismatch(rhs.mode(), self.mode())),
        }
    }

    /// Returns `e` with `self = i^e`; approximate values never qualify.
    pub fn is_power_of_i(&self) -> Option<u8> {
        match self {
            Scalar::Exact(e) => e.is_power_of_i(),
            Scalar::Approx(_) => None,
        }
    }

    pub fn is_root_of_unity(&self, tol: &Tolerance) -> Option<u32> {
        match self {
            Scalar::Exact(e) => Field::root_of_unity_order(e, tol),
            Scalar::Approx(a) => Field::root_of_unity_order(a, tol),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(e) => write!(f, "{}", e),
            Scalar::Approx(a) => write!(f, "{}", a),
        }
    }
}
