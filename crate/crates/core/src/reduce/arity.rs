//! Arity reduction by pinning and projection, as a verified search.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::classify::{in_a, in_p, support_affine};
use crate::instance::CspInstance;
use crate::numeric::ExactComplex;
use crate::signature::{Gadget, Signature};

use super::ReduceError;

type Sig = Signature<ExactComplex>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    NotA,
    NotP,
    NonaffineSupport,
}

impl Property {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "not_A" | "not_a" => Some(Property::NotA),
            "not_P" | "not_p" => Some(Property::NotP),
            "nonaffine_support" => Some(Property::NonaffineSupport),
            _ => None,
        }
    }

    fn holds(self, f: &Sig, modulo_scalar: bool) -> bool {
        match self {
            Property::NotA => in_a(f, modulo_scalar).is_none(),
            Property::NotP => in_p(f).is_none(),
            Property::NonaffineSupport => support_affine(f, false).is_none(),
        }
    }

    /// The form the search stops at.
    fn is_target(self, f: &Sig) -> bool {
        match self {
            Property::NotA => f.arity() == 1,
            Property::NotP => {
                let zero_free_binary = f.arity() == 2 && f.values().iter().all(|v| !v.is_zero());
                zero_free_binary || is_parity_form(f)
            }
            Property::NonaffineSupport => f.arity() == 2,
        }
    }
}

/// `λ[a,0,1,0]` or `λ[0,1,0,a]` with `a ≠ 0`.
fn is_parity_form(f: &Sig) -> bool {
    let Some(s) = f.to_symmetric() else {
        return false;
    };
    if s.len() != 4 {
        return false;
    }
    let nz: Vec<bool> = s.iter().map(|v| !v.is_zero()).collect();
    nz == [true, false, true, false] || nz == [false, true, false, true]
}

/// One move, with inputs numbered in the current (reduced) signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ArityStep {
    Pin { input: usize, value: usize },
    Project { input: usize },
}

#[derive(Debug, Clone)]
pub struct ArityResult {
    pub steps: Vec<ArityStep>,
    pub signature: Sig,
    /// `F` with the chosen pins (as `δ₀`/`δ₁` constraints) and projected
    /// inputs (as internal variables); realizes `signature` exactly.
    pub gadget: Gadget<ExactComplex>,
    pub examined: usize,
}

fn apply(f: &Sig, step: ArityStep) -> Sig {
    match step {
        ArityStep::Pin { input, value } => f.pin(input, value).expect("input in range"),
        ArityStep::Project { input } => f.project(input).expect("input in range"),
    }
}

fn build_gadget(f: &Sig, name: &str, steps: &[ArityStep]) -> Gadget<ExactComplex> {
    let k = f.arity();
    let mut inst = CspInstance::new(k);
    inst.add_function(name, f.clone()).expect("fresh instance");
    inst.add_constraint(name, (0..k).collect()).expect("arity");
    let mut live: Vec<usize> = (0..k).collect();
    for &s in steps {
        match s {
            ArityStep::Pin { input, value } => {
                let v = live.remove(input);
                let pin = format!("DELTA{value}");
                inst.add_function(&pin, Signature::pin_unary(value)).expect("pin table");
                inst.add_constraint(&pin, vec![v]).expect("unary");
            }
            ArityStep::Project { input } => {
                live.remove(input);
            }
        }
    }
    Gadget {
        instance: inst,
        dangling: live,
    }
}

/// Breadth-first search over pin/project moves that keep `property`,
/// stopping at the first signature in the target form. Moves on later
/// inputs are tried first. `budget` bounds the number of signatures
/// examined.
pub fn reduce_arity_search(
    f: &Sig,
    property: Property,
    budget: usize,
    modulo_scalar: bool,
) -> Result<ArityResult, ReduceError> {
    if !property.holds(f, modulo_scalar) {
        return Err(ReduceError::Precondition(format!(
            "{f:?} does not have property {property:?}"
        )));
    }
    let mut seen: BTreeSet<(usize, Vec<String>)> = BTreeSet::new();
    let mut queue = VecDeque::from([(f.clone(), Vec::<ArityStep>::new())]);
    let mut examined = 0;
    while let Some((g, steps)) = queue.pop_front() {
        examined += 1;
        if property.is_target(&g) {
            let gadget = build_gadget(f, "F", &steps);
            return Ok(ArityResult {
                steps,
                signature: g,
                gadget,
                examined,
            });
        }
        if examined >= budget {
            break;
        }
        for input in (0..g.arity()).rev() {
            for step in [
                ArityStep::Pin { input, value: 0 },
                ArityStep::Pin { input, value: 1 },
                ArityStep::Project { input },
            ] {
                let h = apply(&g, step);
                let key = (h.arity(), h.values().iter().map(|v| v.to_string()).collect());
                if h.arity() >= 1 && property.holds(&h, modulo_scalar) && seen.insert(key) {
                    let mut next = steps.clone();
                    next.push(step);
                    queue.push_back((h, next));
                }
            }
        }
    }
    Err(ReduceError::BudgetExhausted(format!(
        "no {property:?} signature of the target form after {examined} candidates"
    )))
}
