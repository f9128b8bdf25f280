//! Polynomial interpolation by thickening, in plain and block form.

use serde_json::json;

use crate::instance::{CspInstance, Stats};
use crate::numeric::{Field, Tolerance};
use crate::signature::Signature;

use super::linalg::{kron_solve, Matrix};
use super::oracle::{query_all, OracleFn};
use super::trace::{max_stats, ReductionTrace, TraceStep};
use super::ReduceError;

/// Largest number of oracle instances one system may request.
pub(crate) const MAX_SYSTEM_SIZE: usize = 1 << 16;

/// Relative tolerance for re-multiplying approximate systems.
pub(crate) const APPROX_SYSTEM_TOL: f64 = 1e-6;

/// The base takes value `c` on class A and `e` on class B (its support);
/// the target takes `p` on A, `q` on B and vanishes elsewhere.
struct TwoClass<S> {
    c: S,
    e: S,
    p: S,
    q: S,
}

fn split_classes<S: Field>(target: &Signature<S>, base: &Signature<S>) -> Result<TwoClass<S>, ReduceError> {
    if target.arity() != base.arity() {
        return Err(ReduceError::Precondition("target and base arities differ".into()));
    }
    let support = base.support();
    let Some(&first) = support.first() else {
        return Err(ReduceError::Precondition("base function is identically zero".into()));
    };
    let c = base.value(first).clone();
    let Some(&other) = support.iter().find(|&&i| *base.value(i) != c) else {
        return Err(ReduceError::Precondition(
            "base function must take two distinct nonzero values".into(),
        ));
    };
    let e = base.value(other).clone();
    let (p, q) = (target.value(first).clone(), target.value(other).clone());
    for i in 0..base.len() {
        let v = base.value(i);
        let want = if v.is_zero() {
            S::zero()
        } else if *v == c {
            p.clone()
        } else if *v == e {
            q.clone()
        } else {
            return Err(ReduceError::Precondition(
                "base function takes more than two nonzero values".into(),
            ));
        };
        if *target.value(i) != want {
            return Err(ReduceError::Precondition(
                "target is not constant on the base's value classes".into(),
            ));
        }
    }
    Ok(TwoClass { c, e, p, q })
}

/// Mixed-radix counter over block parameters, first block most significant.
pub(crate) fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = dims.iter().product();
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        f(&idx);
        for j in (0..dims.len()).rev() {
            idx[j] += 1;
            if idx[j] < dims[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Recovers `Z(target)` from oracle values of instances in which every
/// occurrence of `func` in block `i` is replaced by `y_i` parallel copies
/// of `base`, for `y_i = 1..|B_i|+1`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn interpolate_thickening<S: Field>(
    op: &str,
    target: &CspInstance<S>,
    func: &str,
    base_name: &str,
    base: &Signature<S>,
    d: usize,
    oracle: OracleFn<S>,
    trace: &ReductionTrace,
) -> Result<S, ReduceError> {
    if d == 0 {
        return Err(ReduceError::Precondition("block size must be at least 1".into()));
    }
    let t_sig = target
        .functions
        .get(func)
        .ok_or_else(|| ReduceError::Precondition(format!("unknown function `{func}`")))?;
    let occ: Vec<usize> = (0..target.constraints.len())
        .filter(|&i| target.constraints[i].func == func)
        .collect();
    let before = target.stats();
    if occ.is_empty() {
        let mut plain = target.clone();
        plain.prune_functions();
        let z = oracle(&plain)?;
        trace.record(TraceStep::new(op, before, plain.stats(), 1, S::one().to_scalar()));
        return Ok(z);
    }
    let TwoClass { c, e, p, q } = split_classes(t_sig, base)?;
    let ratio = e.checked_div(&c).expect("support value");
    if let Some(k) = ratio.root_of_unity_order(&Tolerance::default()) {
        return Err(ReduceError::RootOfUnity(format!("ratio {ratio} (order {k})")));
    }
    let blocks: Vec<&[usize]> = occ.chunks(d).collect();
    let dims: Vec<usize> = blocks.iter().map(|b| b.len() + 1).collect();
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(x).filter(|&t| t <= MAX_SYSTEM_SIZE))
        .ok_or_else(|| ReduceError::Precondition("interpolation system too large".into()))?;

    let mut block_of = vec![usize::MAX; target.constraints.len()];
    for (b, ids) in blocks.iter().enumerate() {
        for &i in *ids {
            block_of[i] = b;
        }
    }
    let mut instances = Vec::with_capacity(total);
    let mut divisors = Vec::with_capacity(total);
    for_each_index(&dims, |idx| {
        let mut g = CspInstance::new(target.num_vars);
        for (k, sig) in &target.functions {
            if k != func {
                g.add_function(k, sig.clone()).expect("copied table");
            }
        }
        let name = g.intern_function(base_name, base.clone());
        let mut divisor = S::one();
        for (i, con) in target.constraints.iter().enumerate() {
            if con.func == func {
                let y = idx[block_of[i]] + 1;
                for _ in 0..y {
                    g.add_constraint(&name, con.vars.clone()).expect("same arity");
                }
                divisor = divisor * c.pow(y as u64);
            } else {
                g.add_constraint(&con.func, con.vars.clone()).expect("copied constraint");
            }
        }
        instances.push(g);
        divisors.push(divisor);
    });
    let after = instances
        .iter()
        .map(|g| g.stats())
        .fold(Stats::default(), max_stats);
    if after.delta > (d + 1) * before.delta {
        return Err(ReduceError::verification(op, format!("degree {} exceeds (d+1)·Δ", after.delta)));
    }
    let values = query_all(oracle, &instances)?;
    let rhs: Vec<S> = values
        .into_iter()
        .zip(&divisors)
        .map(|(z, dv)| z.checked_div(dv).expect("nonzero divisor"))
        .collect();
    let factors: Vec<Matrix<S>> = dims
        .iter()
        .map(|&r| {
            (1..=r)
                .map(|y| (0..r).map(|t| ratio.pow((y * t) as u64)).collect())
                .collect()
        })
        .collect();
    let rho = kron_solve(&factors, &rhs, APPROX_SYSTEM_TOL)?;
    let weights: Vec<Vec<S>> = dims
        .iter()
        .map(|&r| {
            (0..r)
                .map(|t| p.pow((r - 1 - t) as u64) * q.pow(t as u64))
                .collect()
        })
        .collect();
    let mut z = S::zero();
    let mut pos = 0;
    for_each_index(&dims, |idx| {
        let w = idx
            .iter()
            .enumerate()
            .fold(rho[pos].clone(), |acc, (b, &t)| acc * weights[b][t].clone());
        z = z.clone() + w;
        pos += 1;
    });
    trace.record(
        TraceStep::new(op, before, after, total, S::one().to_scalar()).with_detail(json!({
            "function": func,
            "block_size": d,
            "blocks": blocks.iter().map(|b| b.len()).collect::<Vec<_>>(),
            "ratio": ratio.to_string(),
        })),
    );
    Ok(z)
}

/// Block interpolation: occurrences of `func` are split into blocks of `d`
/// and each block is thickened independently by `base`.
pub fn interpolate_block<S: Field>(
    target: &CspInstance<S>,
    func: &str,
    base: &Signature<S>,
    d: usize,
    oracle: OracleFn<S>,
    trace: &ReductionTrace,
) -> Result<S, ReduceError> {
    interpolate_thickening("interpolate_block", target, func, func, base, d, oracle, trace)
}

/// Plain interpolation: all occurrences of `func` form one block, giving
/// `m+1` oracle instances.
pub fn interpolate_vanilla<S: Field>(
    target: &CspInstance<S>,
    func: &str,
    base: &Signature<S>,
    oracle: OracleFn<S>,
    trace: &ReductionTrace,
) -> Result<S, ReduceError> {
    let d = target.occurrences(func).max(1);
    interpolate_thickening("interpolate_vanilla", target, func, func, base, d, oracle, trace)
}
