//! Polynomial-time evaluators for the tractable classes and a dispatcher.

mod affine;
mod product;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::classify::{family_verdict, in_a, in_p, AWitness, FamilyClass, ProductWitness};
use crate::instance::{brute_force, CspInstance, InstanceError};
use crate::numeric::ExactComplex;
use crate::signature::Signature;

pub use affine::eval_affine;
pub use product::eval_product;

#[derive(Debug, Error)]
pub enum TractError {
    #[error("no witness for function `{0}`")]
    MissingWitness(String),
    #[error("function `{name}` is not in class {class}")]
    NotInClass { name: String, class: &'static str },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Product witnesses for every function of the instance.
pub fn product_witnesses(
    inst: &CspInstance<ExactComplex>,
) -> Result<BTreeMap<String, ProductWitness>, TractError> {
    inst.functions
        .iter()
        .map(|(name, f)| {
            in_p(f).map(|w| (name.clone(), w)).ok_or_else(|| TractError::NotInClass {
                name: name.clone(),
                class: "P",
            })
        })
        .collect()
}

/// Strict affine witnesses for every function of the instance.
pub fn affine_witnesses(
    inst: &CspInstance<ExactComplex>,
) -> Result<BTreeMap<String, AWitness>, TractError> {
    inst.functions
        .iter()
        .map(|(name, f)| {
            in_a(f, false).map(|w| (name.clone(), w)).ok_or_else(|| TractError::NotInClass {
                name: name.clone(),
                class: "A",
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Affine,
    Product,
    Brute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoResult {
    pub value: ExactComplex,
    pub route: Route,
    pub class: FamilyClass,
    pub warning: Option<String>,
}

/// Classifies the function table and evaluates by the matching algorithm,
/// falling back to brute force (with a warning) for hard families.
pub fn eval_auto(inst: &CspInstance<ExactComplex>, cap: usize) -> Result<AutoResult, TractError> {
    let family: Vec<Signature<ExactComplex>> = inst.functions.values().cloned().collect();
    let verdict = family_verdict(&family, false);
    let (value, route, warning) = match verdict.class {
        FamilyClass::TractableP => (
            eval_product(inst, &product_witnesses(inst)?)?,
            Route::Product,
            None,
        ),
        FamilyClass::TractableA => (
            eval_affine(inst, &affine_witnesses(inst)?)?,
            Route::Affine,
            None,
        ),
        FamilyClass::Hard => (
            brute_force(inst, cap)?,
            Route::Brute,
            Some("function family is HARD; evaluated by exhaustive enumeration".to_string()),
        ),
    };
    Ok(AutoResult {
        value,
        route,
        class: verdict.class,
        warning,
    })
}
