//! Dense Boolean-domain signatures and the pointwise/tensor algebra on them.
//!
//! Bit order: for a signature of arity k, the table index of the input
//! `(x_0, …, x_{k-1})` is `Σ x_j · 2^{k-1-j}`, i.e. the first input is the
//! most significant bit. Variable indices in this API are 0-based.

mod gadget;

use std::fmt;

use thiserror::Error;

use crate::numeric::Field;

pub use gadget::{gadget_signature, Gadget, DEFAULT_DANGLING_LIMIT};

/// Largest arity a dense table may have.
pub const MAX_ARITY: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignatureError {
    #[error("table of length {len} does not match arity {arity}")]
    BadLength { arity: usize, len: usize },
    #[error("arity {0} exceeds the dense-table cap of {MAX_ARITY}")]
    ArityTooLarge(usize),
    #[error("variable index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("arity {arity} is not a multiple of {l}")]
    ArityNotDivisible { arity: usize, l: usize },
    #[error("signature is identically zero")]
    ZeroSignature,
    #[error("signature is not an exact {0}-th tensor power")]
    NotTensorPower(usize),
    #[error("expected a binary signature, got arity {0}")]
    NotBinary(usize),
    #[error("gadget has {got} dangling variables, limit is {limit}")]
    TooManyDangling { got: usize, limit: usize },
    #[error("invalid gadget: {0}")]
    InvalidGadget(String),
}

#[derive(Clone, PartialEq)]
pub struct Signature<S> {
    arity: usize,
    values: Vec<S>,
}

/// Bit `j` (0-based, most significant first) of `index` for the given arity.
#[inline]
pub fn bit(index: usize, j: usize, arity: usize) -> usize {
    (index >> (arity - 1 - j)) & 1
}

impl<S: Field> Signature<S> {
    pub fn new(arity: usize, values: Vec<S>) -> Result<Self, SignatureError> {
        if arity > MAX_ARITY {
            return Err(SignatureError::ArityTooLarge(arity));
        }
        if values.len() != 1 << arity {
            return Err(SignatureError::BadLength {
                arity,
                len: values.len(),
            });
        }
        Ok(Signature { arity, values })
    }

    /// Builds a table from a function of the input bits.
    pub fn from_fn(arity: usize, f: impl Fn(&[usize]) -> S) -> Result<Self, SignatureError> {
        if arity > MAX_ARITY {
            return Err(SignatureError::ArityTooLarge(arity));
        }
        let mut bits = vec![0usize; arity];
        let values = (0..1usize << arity)
            .map(|idx| {
                for (j, b) in bits.iter_mut().enumerate() {
                    *b = bit(idx, j, arity);
                }
                f(&bits)
            })
            .collect();
        Ok(Signature { arity, values })
    }

    pub fn from_ints(arity: usize, values: &[i64]) -> Result<Self, SignatureError> {
        Self::new(arity, values.iter().map(|&v| S::from_int(v)).collect())
    }

    /// Expands `[f_0, …, f_k]` (value by Hamming weight).
    pub fn symmetric(weights: Vec<S>) -> Result<Self, SignatureError> {
        let arity = weights.len().saturating_sub(1);
        if weights.is_empty() {
            return Err(SignatureError::BadLength { arity: 0, len: 0 });
        }
        Self::from_fn(arity, |bits| weights[bits.iter().sum::<usize>()].clone())
    }

    pub fn symmetric_ints(weights: &[i64]) -> Result<Self, SignatureError> {
        Self::symmetric(weights.iter().map(|&v| S::from_int(v)).collect())
    }

    pub fn constant(value: S) -> Self {
        Signature {
            arity: 0,
            values: vec![value],
        }
    }

    /// `=_k`.
    pub fn equality(k: usize) -> Self {
        Self::from_fn(k, |bits| {
            if bits.iter().all(|&b| b == bits[0]) {
                S::one()
            } else {
                S::zero()
            }
        })
        .expect("equality arity within cap")
    }

    /// `≠_2` = [0,1,0].
    pub fn disequality() -> Self {
        Self::symmetric(vec![S::zero(), S::one(), S::zero()]).expect("binary")
    }

    /// `δ_c`.
    pub fn pin_unary(c: usize) -> Self {
        if c == 0 {
            Self::unary(S::one(), S::zero())
        } else {
            Self::unary(S::zero(), S::one())
        }
    }

    /// `OR_2` = [0,1,1].
    pub fn or2() -> Self {
        Self::symmetric(vec![S::zero(), S::one(), S::one()]).expect("binary")
    }

    pub fn unary(a: S, b: S) -> Self {
        Signature {
            arity: 1,
            values: vec![a, b],
        }
    }

    /// Binary signature from its 2×2 matrix `((f00, f01), (f10, f11))`.
    pub fn binary(f00: S, f01: S, f10: S, f11: S) -> Self {
        Signature {
            arity: 2,
            values: vec![f00, f01, f10, f11],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> &S {
        &self.values[index]
    }

    /// Value at an explicit input assignment.
    pub fn eval(&self, bits: &[usize]) -> &S {
        debug_assert_eq!(bits.len(), self.arity);
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b);
        &self.values[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Field::is_zero)
    }

    /// Indices with nonzero value.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| !self.values[i].is_zero())
            .collect()
    }

    /// `[f_0,…,f_k]` if the signature is symmetric.
    pub fn to_symmetric(&self) -> Option<Vec<S>> {
        let mut weights: Vec<Option<S>> = vec![None; self.arity + 1];
        for (idx, v) in self.values.iter().enumerate() {
            let w = idx.count_ones() as usize;
            match &weights[w] {
                None => weights[w] = Some(v.clone()),
                Some(existing) if existing == v => {}
                Some(_) => return None,
            }
        }
        weights.into_iter().collect()
    }

    fn check_index(&self, j: usize) -> Result<(), SignatureError> {
        if j >= self.arity {
            Err(SignatureError::IndexOutOfRange {
                index: j,
                arity: self.arity,
            })
        } else {
            Ok(())
        }
    }

    /// Maps an index of the arity-(k−1) signature obtained by removing
    /// variable `j` to the full index with `x_j = c`.
    fn insert_bit(idx: usize, j: usize, c: usize, arity: usize) -> usize {
        let low_width = arity - 1 - j;
        let high = idx >> low_width;
        let low = idx & ((1 << low_width) - 1);
        (((high << 1) | c) << low_width) | low
    }

    /// `F^{x_j = c}`.
    pub fn pin(&self, j: usize, c: usize) -> Result<Self, SignatureError> {
        self.check_index(j)?;
        let k = self.arity;
        let values = (0..1usize << (k - 1))
            .map(|idx| self.values[Self::insert_bit(idx, j, c & 1, k)].clone())
            .collect();
        Ok(Signature {
            arity: k - 1,
            values,
        })
    }

    /// `F^{x_j = *}`, summing out variable `j`.
    pub fn project(&self, j: usize) -> Result<Self, SignatureError> {
        self.check_index(j)?;
        let k = self.arity;
        let values = (0..1usize << (k - 1))
            .map(|idx| {
                self.values[Self::insert_bit(idx, j, 0, k)].clone()
                    + self.values[Self::insert_bit(idx, j, 1, k)].clone()
            })
            .collect();
        Ok(Signature {
            arity: k - 1,
            values,
        })
    }

    /// Identifies variable `l` with variable `j` (`j < l`), dropping `l`.
    pub fn merge(&self, j: usize, l: usize) -> Result<Self, SignatureError> {
        self.check_index(j)?;
        self.check_index(l)?;
        if j == l {
            return Ok(self.clone());
        }
        let (j, l) = if j < l { (j, l) } else { (l, j) };
        let k = self.arity;
        Self::from_fn(k - 1, |bits| {
            let mut full = Vec::with_capacity(k);
            full.extend_from_slice(&bits[..l]);
            full.insert(l, bits[j]);
            full.extend_from_slice(&bits[l..]);
            self.eval(&full).clone()
        })
    }

    /// `F ⊗ G`: the first `arity(F)` inputs go to F.
    pub fn tensor(&self, other: &Self) -> Result<Self, SignatureError> {
        let arity = self.arity + other.arity;
        if arity > MAX_ARITY {
            return Err(SignatureError::ArityTooLarge(arity));
        }
        let mut values = Vec::with_capacity(1 << arity);
        for a in &self.values {
            for b in &other.values {
                values.push(a.clone() * b.clone());
            }
        }
        Ok(Signature { arity, values })
    }

    pub fn tensor_power(&self, l: usize) -> Result<Self, SignatureError> {
        let mut acc = Signature::constant(S::one());
        for _ in 0..l {
            acc = acc.tensor(self)?;
        }
        Ok(acc)
    }

    /// Recovers `f` with `f^{⊗l} = self`.
    ///
    /// `f` is unique up to an l-th root of unity. With `u` the first input
    /// whose diagonal entry `F(u,…,u)` is nonzero, `f(u)` is taken as the
    /// first l-th root of that entry available in the scalar mode (the
    /// positive real root when the entry is a positive rational) and
    /// `f(v) = F(u,…,u,v) / f(u)^{l-1}`. The result is re-verified.
    pub fn tensor_root(&self, l: usize) -> Result<Self, SignatureError> {
        if l == 0 || self.arity % l != 0 {
            return Err(SignatureError::ArityNotDivisible {
                arity: self.arity,
                l,
            });
        }
        if self.is_zero() {
            return Err(SignatureError::ZeroSignature);
        }
        let k = self.arity / l;
        let width = 1usize << k;
        let repeat = |u: usize, times: usize| (0..times).fold(0usize, |acc, _| (acc << k) | u);
        let anchor = (0..width)
            .find(|&u| !self.values[repeat(u, l)].is_zero())
            .ok_or(SignatureError::NotTensorPower(l))?;
        let diag = &self.values[repeat(anchor, l)];
        let prefix = repeat(anchor, l - 1) << k;
        for root in diag.nth_roots(l as u32) {
            let denom = root.pow(l as u64 - 1);
            let Some(denom_inv) = denom.inv() else {
                continue;
            };
            let f = Signature {
                arity: k,
                values: (0..width)
                    .map(|v| self.values[prefix | v].clone() * denom_inv.clone())
                    .collect(),
            };
            let check = f.tensor_power(l)?;
            if check
                .values
                .iter()
                .zip(&self.values)
                .all(|(a, b)| a.close_to(b, 1e-9))
            {
                return Ok(f);
            }
        }
        Err(SignatureError::NotTensorPower(l))
    }

    pub fn scale(&self, c: &S) -> Self {
        Signature {
            arity: self.arity,
            values: self.values.iter().map(|v| v.clone() * c.clone()).collect(),
        }
    }

    /// Pointwise product of two signatures of equal arity.
    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        Signature {
            arity: self.arity,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() * b.clone())
                .collect(),
        }
    }

    pub fn hadamard_power(&self, r: u64) -> Self {
        Signature {
            arity: self.arity,
            values: self.values.iter().map(|v| v.pow(r)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        Signature {
            arity: self.arity,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    /// Returns λ with `self = λ·other`, if one exists.
    pub fn ratio_to(&self, other: &Self) -> Option<S> {
        if self.arity != other.arity {
            return None;
        }
        let pivot = other.values.iter().position(|v| !v.is_zero());
        let lambda = match pivot {
            None => return if self.is_zero() { Some(S::one()) } else { None },
            Some(p) => self.values[p].checked_div(&other.values[p])?,
        };
        let ok = self
            .values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| *a == lambda.clone() * b.clone());
        ok.then_some(lambda)
    }

    /// Permutes inputs: the new input `i` is the old input `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self, SignatureError> {
        assert_eq!(perm.len(), self.arity);
        let k = self.arity;
        Self::from_fn(k, |bits| {
            let mut old = vec![0usize; k];
            for (i, &p) in perm.iter().enumerate() {
                old[p] = bits[i];
            }
            self.eval(&old).clone()
        })
    }

    /// Complements every input: `F(x̄)`.
    pub fn flip(&self) -> Self {
        let mask = (1usize << self.arity) - 1;
        Signature {
            arity: self.arity,
            values: (0..self.values.len())
                .map(|i| self.values[i ^ mask].clone())
                .collect(),
        }
    }

    fn require_binary(&self) -> Result<(), SignatureError> {
        if self.arity == 2 {
            Ok(())
        } else {
            Err(SignatureError::NotBinary(self.arity))
        }
    }

    /// 2×2 matrix view `[[F(0,0), F(0,1)], [F(1,0), F(1,1)]]`.
    pub fn matrix(&self) -> Result<[[S; 2]; 2], SignatureError> {
        self.require_binary()?;
        let v = &self.values;
        Ok([[v[0].clone(), v[1].clone()], [v[2].clone(), v[3].clone()]])
    }

    pub fn from_matrix(m: [[S; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        Self::binary(a, b, c, d)
    }

    pub fn transpose(&self) -> Result<Self, SignatureError> {
        self.require_binary()?;
        let v = &self.values;
        Ok(Self::binary(
            v[0].clone(),
            v[2].clone(),
            v[1].clone(),
            v[3].clone(),
        ))
    }

    pub fn determinant(&self) -> Result<S, SignatureError> {
        let [[a, b], [c, d]] = self.matrix()?;
        Ok(a * d - b * c)
    }

    /// Matrix product of two binary signatures, `Σ_z F(x,z) G(z,y)`.
    pub fn matmul(&self, other: &Self) -> Result<Self, SignatureError> {
        let a = self.matrix()?;
        let b = other.matrix()?;
        let e = |i: usize, j: usize| {
            a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone()
        };
        Ok(Self::binary(e(0, 0), e(0, 1), e(1, 0), e(1, 1)))
    }

    pub fn matrix_power(&self, r: u64) -> Result<Self, SignatureError> {
        self.require_binary()?;
        let mut acc = Self::equality(2);
        for _ in 0..r {
            acc = acc.matmul(self)?;
        }
        Ok(acc)
    }

    /// Applies a 2×2 matrix to every input.
    ///
    /// `row = true` treats the signature as a row vector: the result is
    /// `F · M^{⊗k}`, i.e. `G(x) = Σ_z F(z) Π_j M[z_j][x_j]`. Otherwise the
    /// result is `M^{⊗k} · F`, i.e. `G(x) = Σ_z Π_j M[x_j][z_j] F(z)`.
    pub fn transform(&self, m: &[[S; 2]; 2], row: bool) -> Self {
        let k = self.arity;
        let mut cur = self.values.clone();
        for j in 0..k {
            let shift = k - 1 - j;
            let mut next = vec![S::zero(); cur.len()];
            for (idx, out) in next.iter_mut().enumerate() {
                let x = (idx >> shift) & 1;
                let base = idx & !(1 << shift);
                let mut acc = S::zero();
                for z in 0..2usize {
                    let coef = if row { &m[z][x] } else { &m[x][z] };
                    if coef.is_zero() {
                        continue;
                    }
                    acc = acc + coef.clone() * cur[base | (z << shift)].clone();
                }
                *out = acc;
            }
            cur = next;
        }
        Signature {
            arity: k,
            values: cur,
        }
    }

    /// Converts every entry to another mode via `f`.
    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> Signature<T> {
        Signature {
            arity: self.arity,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.arity == other.arity
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.close_to(b, tol))
    }
}

impl<S: fmt::Debug> fmt::Debug for Signature<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.values)
    }
}
