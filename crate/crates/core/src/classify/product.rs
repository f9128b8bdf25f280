//! The product class 𝒫 and the degenerate class 𝒟.

use serde::Serialize;

use crate::numeric::ExactComplex;
use crate::signature::Signature;

/// One factor of a product-type signature, over original input indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProductFactor {
    Unary {
        var: usize,
        #[serde(serialize_with = "crate::io::json::serialize_exact_pair")]
        values: [ExactComplex; 2],
    },
    Eq {
        a: usize,
        b: usize,
    },
    Neq {
        a: usize,
        b: usize,
    },
    Pin {
        var: usize,
        value: usize,
    },
}

impl ProductFactor {
    fn value_at(&self, bits: &[usize]) -> ExactComplex {
        let one = ExactComplex::one;
        let zero = ExactComplex::zero;
        match *self {
            ProductFactor::Unary { var, ref values } => values[bits[var]].clone(),
            ProductFactor::Eq { a, b } => {
                if bits[a] == bits[b] {
                    one()
                } else {
                    zero()
                }
            }
            ProductFactor::Neq { a, b } => {
                if bits[a] != bits[b] {
                    one()
                } else {
                    zero()
                }
            }
            ProductFactor::Pin { var, value } => {
                if bits[var] == value {
                    one()
                } else {
                    zero()
                }
            }
        }
    }
}

/// `f = scale · Π factors`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductWitness {
    pub arity: usize,
    #[serde(serialize_with = "crate::io::json::serialize_exact")]
    pub scale: ExactComplex,
    pub factors: Vec<ProductFactor>,
}

impl ProductWitness {
    pub fn rebuild(&self) -> Signature<ExactComplex> {
        Signature::from_fn(self.arity, |bits| {
            let mut acc = self.scale.clone();
            for f in &self.factors {
                if acc.is_zero() {
                    break;
                }
                acc = acc * f.value_at(bits);
            }
            acc
        })
        .expect("arity within cap")
    }

    pub fn verify(&self, f: &Signature<ExactComplex>) -> bool {
        self.arity == f.arity() && self.rebuild() == *f
    }
}

/// Slices `(f^{x_j=0}, f^{x_j=1})`.
fn slices(f: &Signature<ExactComplex>, j: usize) -> (Signature<ExactComplex>, Signature<ExactComplex>) {
    (f.pin(j, 0).unwrap(), f.pin(j, 1).unwrap())
}

/// `G(x without l)` = `F(x with x_l = x_j ⊕ flip)`.
fn identify(f: &Signature<ExactComplex>, j: usize, l: usize, flip: usize) -> Signature<ExactComplex> {
    let k = f.arity();
    Signature::from_fn(k - 1, |bits| {
        let mut full = Vec::with_capacity(k);
        full.extend_from_slice(&bits[..l]);
        let xj = if j < l { bits[j] } else { bits[j - 1] };
        full.insert(l, xj ^ flip);
        full.extend_from_slice(&bits[l..]);
        f.eval(&full).clone()
    })
    .unwrap()
}

fn factor_rec(
    f: &Signature<ExactComplex>,
    vars: &[usize],
    factors: &mut Vec<ProductFactor>,
) -> Option<ExactComplex> {
    let k = f.arity();
    if f.is_zero() {
        return Some(ExactComplex::zero());
    }
    if k == 0 {
        return Some(f.value(0).clone());
    }
    if k == 1 {
        factors.push(ProductFactor::Unary {
            var: vars[0],
            values: [f.value(0).clone(), f.value(1).clone()],
        });
        return Some(ExactComplex::one());
    }
    let rest = |j: usize| -> Vec<usize> {
        vars.iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &v)| v)
            .collect()
    };
    // (a) a pinned input
    for j in 0..k {
        let (f0, f1) = slices(f, j);
        for (c, other, keep) in [(0usize, &f1, &f0), (1, &f0, &f1)] {
            if other.is_zero() {
                factors.push(ProductFactor::Pin {
                    var: vars[j],
                    value: c,
                });
                return factor_rec(keep, &rest(j), factors);
            }
        }
    }
    // (b) an independent input
    for j in 0..k {
        let (f0, f1) = slices(f, j);
        if let Some(mu) = f1.ratio_to(&f0) {
            factors.push(ProductFactor::Unary {
                var: vars[j],
                values: [ExactComplex::one(), mu],
            });
            return factor_rec(&f0, &rest(j), factors);
        }
    }
    // (c) a forced equality or disequality between two inputs
    let support = f.support();
    for j in 0..k {
        for l in j + 1..k {
            let (mj, ml) = (1usize << (k - 1 - j), 1usize << (k - 1 - l));
            for flip in 0..2usize {
                let consistent = support.iter().all(|&x| {
                    let bj = usize::from(x & mj != 0);
                    let bl = usize::from(x & ml != 0);
                    bl == bj ^ flip
                });
                if consistent {
                    factors.push(if flip == 0 {
                        ProductFactor::Eq {
                            a: vars[j],
                            b: vars[l],
                        }
                    } else {
                        ProductFactor::Neq {
                            a: vars[j],
                            b: vars[l],
                        }
                    });
                    let g = identify(f, j, l, flip);
                    return factor_rec(&g, &rest(l), factors);
                }
            }
        }
    }
    None
}

/// Membership in 𝒫 with a factorization witness that has been re-verified.
pub fn in_p(f: &Signature<ExactComplex>) -> Option<ProductWitness> {
    let vars: Vec<usize> = (0..f.arity()).collect();
    let mut factors = Vec::new();
    let scale = factor_rec(f, &vars, &mut factors)?;
    let w = ProductWitness {
        arity: f.arity(),
        scale,
        factors,
    };
    assert!(w.verify(f), "product witness failed to rebuild the signature");
    Some(w)
}

/// Unary factors `u_1 ⊗ … ⊗ u_k` with `f = u_1 ⊗ … ⊗ u_k`, if `f ∈ 𝒟`.
pub fn tensor_factors(f: &Signature<ExactComplex>) -> Option<Vec<[ExactComplex; 2]>> {
    let mut out = Vec::new();
    let mut cur = f.clone();
    while cur.arity() > 0 {
        let (f0, f1) = slices(&cur, 0);
        if f0.is_zero() {
            out.push([ExactComplex::zero(), ExactComplex::one()]);
            cur = f1;
        } else if let Some(mu) = f1.ratio_to(&f0) {
            out.push([ExactComplex::one(), mu]);
            cur = f0;
        } else {
            return None;
        }
    }
    let c = cur.value(0).clone();
    if let Some(first) = out.first_mut() {
        first[0] = first[0].clone() * c.clone();
        first[1] = first[1].clone() * c;
    }
    Some(out)
}

pub fn in_d(f: &Signature<ExactComplex>) -> bool {
    tensor_factors(f).is_some()
}

/// Degenerate means a tensor product of unaries; for binary signatures this
/// coincides with a vanishing determinant.
pub fn is_degenerate(f: &Signature<ExactComplex>) -> bool {
    if f.arity() == 2 {
        return f.determinant().unwrap().is_zero();
    }
    in_d(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Sig = Signature<ExactComplex>;

    fn sym(v: &[i64]) -> Sig {
        Sig::symmetric_ints(v).unwrap()
    }

    #[test]
    fn disequality_is_product() {
        let w = in_p(&sym(&[0, 1, 0])).unwrap();
        assert!(w.verify(&sym(&[0, 1, 0])));
        assert!(w
            .factors
            .iter()
            .any(|f| matches!(f, ProductFactor::Neq { .. })));
    }

    #[test]
    fn diagonal_is_product() {
        let f = Sig::from_ints(2, &[1, 0, 0, 5]).unwrap();
        assert!(in_p(&f).is_some());
    }

    #[test]
    fn or_is_not_product() {
        assert!(in_p(&sym(&[0, 1, 1])).is_none());
    }

    #[test]
    fn degenerate_examples() {
        let u = Sig::from_ints(1, &[1, 2]).unwrap();
        let v = Sig::from_ints(1, &[3, 4]).unwrap();
        assert!(in_d(&u.tensor(&v).unwrap()));
        assert!(!in_d(&sym(&[1, 0, 1])));
        assert!(!is_degenerate(&sym(&[1, 0, 1])));
        assert!(is_degenerate(&sym(&[1, 1, 1])));
    }

    #[test]
    fn tensor_factors_rebuild() {
        let u = Sig::from_ints(1, &[0, 2]).unwrap();
        let v = Sig::from_ints(1, &[3, -4]).unwrap();
        let f = u.tensor(&v).unwrap().tensor(&u).unwrap();
        let parts = tensor_factors(&f).unwrap();
        let rebuilt = parts
            .iter()
            .map(|[a, b]| Sig::unary(a.clone(), b.clone()))
            .reduce(|acc, s| acc.tensor(&s).unwrap())
            .unwrap();
        assert_eq!(rebuilt, f);
    }

    #[test]
    fn zero_signature_is_product() {
        assert!(in_p(&sym(&[0, 0, 0])).is_some());
    }
}
