//! Affine supports and the affine class 𝒜.

use serde::Serialize;

use crate::numeric::ExactComplex;
use crate::signature::Signature;

/// The support `{base ⊕ Σ y_j basis_j}` as a GF(2) affine subspace.
///
/// Points are table indices (first input most significant). The basis is in
/// reduced row-echelon form: `pivots[j]` is a coordinate where `basis[j]` is
/// the only basis vector with a 1, and `base` is 0 on every pivot, so the
/// parameter `y_j` equals the input at `pivots[j]`. `base = None` encodes the
/// empty support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineWitness {
    pub arity: usize,
    pub base: Option<usize>,
    pub basis: Vec<usize>,
    pub pivots: Vec<usize>,
}

impl AffineWitness {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Point with parameters `y` (bit j of `y` is `y_j`).
    pub fn point(&self, y: usize) -> usize {
        let mut x = self.base.expect("nonempty support");
        for (j, b) in self.basis.iter().enumerate() {
            if (y >> j) & 1 == 1 {
                x ^= b;
            }
        }
        x
    }

    /// Every point of the subspace.
    pub fn members(&self) -> Vec<usize> {
        match self.base {
            None => Vec::new(),
            Some(_) => (0..1usize << self.dimension()).map(|y| self.point(y)).collect(),
        }
    }

    /// Re-checks that the subspace equals the support of `f` exactly.
    pub fn verify(&self, f: &Signature<ExactComplex>) -> bool {
        let mut members = self.members();
        members.sort_unstable();
        members == f.support()
    }
}

/// Bit mask of coordinate `j` (0-based, most significant first).
pub(crate) fn coord_mask(j: usize, arity: usize) -> usize {
    1 << (arity - 1 - j)
}

/// Reduced row-echelon basis of the span of `vectors`; returns the basis
/// and the pivot coordinate of each basis vector.
pub(crate) fn rref_span(vectors: &[usize], arity: usize) -> (Vec<usize>, Vec<usize>) {
    let mut basis: Vec<usize> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for &v in vectors {
        let mut w = v;
        for (b, &p) in basis.iter().zip(&pivots) {
            if w & coord_mask(p, arity) != 0 {
                w ^= b;
            }
        }
        if w == 0 {
            continue;
        }
        let p = (0..arity).find(|&j| w & coord_mask(j, arity) != 0).unwrap();
        let m = coord_mask(p, arity);
        for b in basis.iter_mut() {
            if *b & m != 0 {
                *b ^= w;
            }
        }
        basis.push(w);
        pivots.push(p);
    }
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.sort_by_key(|&i| pivots[i]);
    (
        order.iter().map(|&i| basis[i]).collect(),
        order.iter().map(|&i| pivots[i]).collect(),
    )
}

/// Affine witness of an explicit point set, if the set is affine.
pub(crate) fn affine_hull_exact(points: &[usize], arity: usize) -> Option<AffineWitness> {
    let Some(&first) = points.first() else {
        return Some(AffineWitness {
            arity,
            base: None,
            basis: Vec::new(),
            pivots: Vec::new(),
        });
    };
    let diffs: Vec<usize> = points.iter().map(|&p| p ^ first).collect();
    let (basis, pivots) = rref_span(&diffs, arity);
    if 1usize << basis.len() != points.len() {
        return None;
    }
    let mut base = first;
    for (b, &p) in basis.iter().zip(&pivots) {
        if base & coord_mask(p, arity) != 0 {
            base ^= b;
        }
    }
    Some(AffineWitness {
        arity,
        base: Some(base),
        basis,
        pivots,
    })
}

/// Affine-support test.
///
/// The default rule is closure under `a ⊕ b ⊕ c`. With `linear_only`
/// the support must instead be closed under `a ⊕ b`, which additionally
/// forces the all-zero input into any nonempty support.
pub fn support_affine(f: &Signature<ExactComplex>, linear_only: bool) -> Option<AffineWitness> {
    let support = f.support();
    if linear_only && !support.is_empty() && support[0] != 0 {
        return None;
    }
    affine_hull_exact(&support, f.arity())
}

/// `c + Σ a_j y_j + Σ_{j<l} 2 b_{jl} y_j y_l (mod 4)` over the inputs
/// `vars[j]` of the signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadraticMod4 {
    pub vars: Vec<usize>,
    pub constant: u8,
    pub linear: Vec<u8>,
    /// Pairs `(j, l)`, `j < l`, with `b_{jl} = 1`.
    pub cross: Vec<(usize, usize)>,
}

impl QuadraticMod4 {
    /// Value at parameters `y` (bit j of `y` is `y_j`).
    pub fn eval(&self, y: usize) -> u8 {
        let mut e = self.constant as u32;
        for (j, &a) in self.linear.iter().enumerate() {
            if (y >> j) & 1 == 1 {
                e += a as u32;
            }
        }
        for &(j, l) in &self.cross {
            if (y >> j) & 1 == 1 && (y >> l) & 1 == 1 {
                e += 2;
            }
        }
        (e % 4) as u8
    }
}

/// Witness for membership in 𝒜: `f = scale · χ · i^{P}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AWitness {
    pub support: AffineWitness,
    pub poly: QuadraticMod4,
    #[serde(serialize_with = "crate::io::json::serialize_exact")]
    pub scale: ExactComplex,
}

impl AWitness {
    /// Rebuilds the table from the witness and compares it with `f`.
    pub fn verify(&self, f: &Signature<ExactComplex>) -> bool {
        if !self.support.verify(f) {
            return false;
        }
        if self.support.base.is_none() {
            return f.is_zero();
        }
        (0..1usize << self.support.dimension()).all(|y| {
            let x = self.support.point(y);
            *f.value(x) == self.scale.clone() * ExactComplex::i_pow(self.poly.eval(y) as i64)
        })
    }
}

/// Membership in 𝒜.
///
/// On an affine support parametrized by the pivot inputs `y`, every value
/// must be a power of i (after dividing by the first support value when
/// `modulo_scalar`). The exponent is fitted by finite differences and then
/// checked at every support point.
pub fn in_a(f: &Signature<ExactComplex>, modulo_scalar: bool) -> Option<AWitness> {
    let support = support_affine(f, false)?;
    let r = support.dimension();
    if support.base.is_none() {
        return Some(AWitness {
            poly: QuadraticMod4 {
                vars: Vec::new(),
                constant: 0,
                linear: Vec::new(),
                cross: Vec::new(),
            },
            support,
            scale: ExactComplex::one(),
        });
    }
    let scale = if modulo_scalar {
        f.value(support.point(0)).clone()
    } else {
        ExactComplex::one()
    };
    let inv = scale.inv()?;
    let exponent = |y: usize| -> Option<u8> {
        (f.value(support.point(y)).clone() * inv.clone()).is_power_of_i()
    };
    let c = exponent(0)?;
    let mut linear = Vec::with_capacity(r);
    for j in 0..r {
        linear.push((exponent(1 << j)? + 4 - c) % 4);
    }
    let mut cross = Vec::new();
    for j in 0..r {
        for l in j + 1..r {
            let e = exponent((1 << j) | (1 << l))? as i32;
            let d = (e - c as i32 - linear[j] as i32 - linear[l] as i32).rem_euclid(4);
            match d {
                0 => {}
                2 => cross.push((j, l)),
                _ => return None,
            }
        }
    }
    let poly = QuadraticMod4 {
        vars: support.pivots.clone(),
        constant: c,
        linear,
        cross,
    };
    for y in 0..1usize << r {
        if exponent(y)? != poly.eval(y) {
            return None;
        }
    }
    Some(AWitness {
        support,
        poly,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type Sig = Signature<ExactComplex>;

    fn sym(v: &[i64]) -> Sig {
        Sig::symmetric_ints(v).unwrap()
    }

    #[test]
    fn equality_support_is_affine() {
        let w = support_affine(&sym(&[1, 0, 1]), false).unwrap();
        assert_eq!(w.basis, vec![0b11]);
        assert_eq!(w.base, Some(0));
    }

    #[test]
    fn or_support_is_not_affine() {
        assert!(support_affine(&sym(&[0, 1, 1]), false).is_none());
    }

    #[test]
    fn linear_rule_requires_zero() {
        // support {01, 10}: affine under a⊕b⊕c but not closed under a⊕b
        let neq = sym(&[0, 1, 0]);
        assert!(support_affine(&neq, false).is_some());
        assert!(support_affine(&neq, true).is_none());
    }

    #[test]
    fn equality_in_a() {
        let w = in_a(&sym(&[1, 0, 1]), false).unwrap();
        assert_eq!(w.poly.constant, 0);
        assert!(w.poly.linear.iter().all(|&a| a == 0));
        assert!(w.verify(&sym(&[1, 0, 1])));
    }

    #[test]
    fn minus_sign_needs_cross_term() {
        // table (1, 1, 1, -1) = i^{2 x1 x2}
        let f = Sig::from_ints(2, &[1, 1, 1, -1]).unwrap();
        let w = in_a(&f, false).unwrap();
        assert_eq!(w.poly.cross, vec![(0, 1)]);
        assert!(w.verify(&f));
    }

    #[test]
    fn non_unit_values_rejected() {
        assert!(in_a(&Sig::from_ints(1, &[1, 2]).unwrap(), false).is_none());
        assert!(in_a(&sym(&[2, 0, 2]), false).is_none());
        assert!(in_a(&sym(&[2, 0, 2]), true).is_some());
    }

    #[test]
    fn odd_cross_term_rejected() {
        // i^{x1 x2} is not in 𝒜
        let i = ExactComplex::i();
        let o = ExactComplex::one();
        let f = Sig::new(2, vec![o.clone(), o.clone(), o, i]).unwrap();
        assert!(in_a(&f, false).is_none());
    }
}
