//! Oracles: black-box evaluators the reductions are allowed to query.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::instance::{eval_ve, BipartiteGrid, CspInstance, DEFAULT_WIDTH_CAP};
use crate::numeric::Field;
use crate::signature::Signature;

use super::ReduceError;

pub type OracleFn<'a, S> = &'a (dyn Fn(&CspInstance<S>) -> Result<S, ReduceError> + Sync);
pub type GridOracleFn<'a, S> = &'a (dyn Fn(&BipartiteGrid<S>) -> Result<S, ReduceError> + Sync);

/// Evaluator restricted to a function family that counts its queries.
pub struct CountingOracle<S> {
    allowed: Option<Vec<Signature<S>>>,
    calls: AtomicUsize,
    width_cap: usize,
}

impl<S: Field> CountingOracle<S> {
    /// Accepts instances over any functions.
    pub fn unrestricted() -> Self {
        CountingOracle {
            allowed: None,
            calls: AtomicUsize::new(0),
            width_cap: DEFAULT_WIDTH_CAP,
        }
    }

    /// Accepts only instances whose constraints use members of `family`.
    pub fn restricted(family: Vec<Signature<S>>) -> Self {
        CountingOracle {
            allowed: Some(family),
            ..Self::unrestricted()
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn check(&self, inst: &CspInstance<S>) -> Result<(), ReduceError> {
        let Some(family) = &self.allowed else {
            return Ok(());
        };
        for c in &inst.constraints {
            let sig = inst.signature_of(c);
            if !family.iter().any(|f| f == sig) {
                return Err(ReduceError::Oracle(format!(
                    "function `{}` = {:?} is outside the oracle family",
                    c.func, sig
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, inst: &CspInstance<S>) -> Result<S, ReduceError> {
        self.check(inst)?;
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(eval_ve(inst, self.width_cap)?)
    }
}

static ACTIVE_WORKERS: AtomicUsize = AtomicUsize::new(0);

fn worker_limit() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Queries `oracle` on every instance, concurrently when idle cores are
/// available. Results are returned in input order.
pub fn query_all<S: Field>(oracle: OracleFn<S>, instances: &[CspInstance<S>]) -> Result<Vec<S>, ReduceError> {
    let spare = worker_limit().saturating_sub(ACTIVE_WORKERS.load(Ordering::SeqCst));
    let helpers = spare.min(instances.len().saturating_sub(1));
    if helpers == 0 {
        return instances.iter().map(oracle).collect();
    }
    ACTIVE_WORKERS.fetch_add(helpers, Ordering::SeqCst);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<S, ReduceError>>>> =
        Mutex::new((0..instances.len()).map(|_| None).collect());
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= instances.len() {
            break;
        }
        let r = oracle(&instances[i]);
        results.lock().unwrap()[i] = Some(r);
    };
    std::thread::scope(|s| {
        for _ in 0..helpers {
            s.spawn(work);
        }
        work();
    });
    ACTIVE_WORKERS.fetch_sub(helpers, Ordering::SeqCst);
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every index processed"))
        .collect()
}
