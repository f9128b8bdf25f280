//! Decision procedures for affine support, 𝒜, 𝒫, 𝒟 and the family-level
//! tractability verdict. All procedures work on exact signatures.

mod affine;
mod product;

use serde::Serialize;

use crate::numeric::ExactComplex;
use crate::signature::Signature;

pub use affine::{in_a, support_affine, AWitness, AffineWitness, QuadraticMod4};
pub use product::{in_d, in_p, is_degenerate, tensor_factors, ProductFactor, ProductWitness};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witnesses {
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<AWitness>,
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<ProductWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    #[serde(rename = "in_A")]
    pub in_a: bool,
    #[serde(rename = "in_P")]
    pub in_p: bool,
    #[serde(rename = "in_D")]
    pub in_d: bool,
    pub affine_support: bool,
    pub degenerate: bool,
    pub witness: Witnesses,
}

/// Classifies one signature. `modulo_scalar` relaxes 𝒜 membership to
/// "some nonzero multiple lies in 𝒜".
pub fn classify(f: &Signature<ExactComplex>, modulo_scalar: bool) -> ClassVerdict {
    let a = in_a(f, modulo_scalar);
    let p = in_p(f);
    let d = in_d(f);
    debug_assert!(!d || p.is_some());
    ClassVerdict {
        in_a: a.is_some(),
        in_p: p.is_some(),
        in_d: d,
        affine_support: support_affine(f, false).is_some(),
        degenerate: is_degenerate(f),
        witness: Witnesses { a, p },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyClass {
    TractableP,
    TractableA,
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyVerdict {
    pub class: FamilyClass,
    #[serde(rename = "subset_of_A")]
    pub subset_of_a: bool,
    #[serde(rename = "subset_of_P")]
    pub subset_of_p: bool,
    /// Index of a member outside 𝒜, when the family is hard.
    #[serde(rename = "not_in_A", skip_serializing_if = "Option::is_none")]
    pub not_in_a: Option<usize>,
    /// Index of a member outside 𝒫, when the family is hard.
    #[serde(rename = "not_in_P", skip_serializing_if = "Option::is_none")]
    pub not_in_p: Option<usize>,
    pub members: Vec<ClassVerdict>,
}

/// Tractability of #CSP(𝓕): product type if every member is in 𝒫,
/// affine if every member is in 𝒜, otherwise hard with a member outside
/// each class. Both subset flags are always reported.
pub fn family_verdict(family: &[Signature<ExactComplex>], modulo_scalar: bool) -> FamilyVerdict {
    let members: Vec<ClassVerdict> = family.iter().map(|f| classify(f, modulo_scalar)).collect();
    let not_in_a = members.iter().position(|v| !v.in_a);
    let not_in_p = members.iter().position(|v| !v.in_p);
    let class = if not_in_p.is_none() {
        FamilyClass::TractableP
    } else if not_in_a.is_none() {
        FamilyClass::TractableA
    } else {
        FamilyClass::Hard
    };
    let hard = class == FamilyClass::Hard;
    FamilyVerdict {
        class,
        subset_of_a: not_in_a.is_none(),
        subset_of_p: not_in_p.is_none(),
        not_in_a: if hard { not_in_a } else { None },
        not_in_p: if hard { not_in_p } else { None },
        members,
    }
}
