//! Reduction machinery: gadget substitution, interpolation, pin
//! elimination, holographic transforms and the end-to-end hardness chain.
//! Every operation is checked against direct evaluation at desk scale and
//! reports its bookkeeping to a [`ReductionTrace`].

mod arity;
mod chain;
mod gadgets;
mod holo;
mod interp;
mod jordan;
mod linalg;
mod oracle;
mod pins;
mod pipeline;
mod trace;

use thiserror::Error;

use crate::instance::InstanceError;
use crate::numeric::NumericError;
use crate::signature::SignatureError;

pub use arity::{reduce_arity_search, ArityStep, ArityResult, Property};
pub use chain::{lemma41_chain, lemma43_gadgets, Lemma43, PlanStep, ReductionPlan};
pub use gadgets::{stretch, substitute_gadget, substitute_gadget_scaled, thicken};
pub use holo::{equality_tree_rewrite, holographic_transform, local_transform_m};
pub use interp::{interpolate_block, interpolate_vanilla};
pub use jordan::interpolate_eq2_from_h;
pub use linalg::{cond_estimate, invert, kron_apply, kron_solve, solve};
pub use oracle::{query_all, CountingOracle, GridOracleFn, OracleFn};
pub use pins::{eliminate_pins_blackbox, eliminate_pins_blockinterp, PinGadget};
pub use pipeline::{build_plan, verify_pipeline, PipelineConfig, PipelineReport};
pub use trace::{ReductionTrace, TraceStep};

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("gadget for `{name}` realizes a different signature: {detail}")]
    SignatureMismatch { name: String, detail: String },
    #[error("{0} is a root of unity; the interpolation system is singular")]
    RootOfUnity(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("ill-conditioned system (estimated condition {0:.3e})")]
    IllConditioned(f64),
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("verification failed at {stage}: {detail}")]
    Verification { stage: String, detail: String },
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

impl ReduceError {
    pub(crate) fn verification(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        ReduceError::Verification {
            stage: stage.into(),
            detail: detail.into(),
        }
    }
}
