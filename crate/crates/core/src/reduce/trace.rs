//! Step-by-step ledger of a reduction.

use std::sync::Mutex;

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::instance::Stats;
use crate::io::json::scalar_to_json;
use crate::numeric::Scalar;

fn serialize_scalar<Ser: Serializer>(s: &Scalar, ser: Ser) -> Result<Ser::Ok, Ser::Error> {
    scalar_to_json(s).serialize(ser)
}

/// One recorded operation. `before` and `after` are recomputed from the
/// instances involved; `after` is the component-wise maximum over every
/// instance the step produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub op: String,
    pub before: Stats,
    pub after: Stats,
    pub oracle_calls: usize,
    #[serde(serialize_with = "serialize_scalar")]
    pub ledger: Scalar,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl TraceStep {
    pub fn new(op: &str, before: Stats, after: Stats, oracle_calls: usize, ledger: Scalar) -> Self {
        TraceStep {
            op: op.to_string(),
            before,
            after,
            oracle_calls,
            ledger,
            status: None,
            error: None,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn failed(mut self, error: &str) -> Self {
        self.status = Some("failed".to_string());
        self.error = Some(error.to_string());
        self
    }
}

/// Ordered list of steps; safe to append from concurrent workers.
#[derive(Debug, Default)]
pub struct ReductionTrace {
    steps: Mutex<Vec<TraceStep>>,
}

impl ReductionTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, step: TraceStep) {
        self.steps.lock().unwrap().push(step);
    }

    pub fn steps(&self) -> Vec<TraceStep> {
        self.steps.lock().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.steps.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({ "steps": self.steps() })
    }
}

/// Component-wise maximum of instance statistics.
pub(crate) fn max_stats(a: Stats, b: Stats) -> Stats {
    Stats {
        n: a.n.max(b.n),
        m: a.m.max(b.m),
        delta: a.delta.max(b.delta),
    }
}
