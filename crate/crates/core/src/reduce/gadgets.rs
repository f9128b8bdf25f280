//! Local rewriting: gadget substitution, thickening and path stretching.

use std::collections::BTreeMap;

use serde_json::json;

use crate::instance::{BipartiteGrid, CspInstance, Side};
use crate::numeric::{Field, Mode, DEFAULT_TOLERANCE};
use crate::signature::{gadget_signature, Gadget, Signature, DEFAULT_DANGLING_LIMIT};

use super::trace::{ReductionTrace, TraceStep};
use super::ReduceError;

/// Exact equality in exact mode, entrywise closeness otherwise.
pub(crate) fn sig_matches<S: Field>(a: &Signature<S>, b: &Signature<S>) -> bool {
    match S::MODE {
        Mode::Exact => a == b,
        Mode::Approx => a.close_to(b, DEFAULT_TOLERANCE),
    }
}

/// Returns λ with `a = λ·b` (λ ≠ 0), tolerant in approximate mode.
pub(crate) fn sig_ratio<S: Field>(a: &Signature<S>, b: &Signature<S>) -> Option<S> {
    if a.arity() != b.arity() {
        return None;
    }
    let p = b.values().iter().position(|v| !v.is_zero())?;
    let lambda = a.value(p).checked_div(b.value(p))?;
    (!lambda.is_zero() && sig_matches(a, &b.scale(&lambda))).then_some(lambda)
}

/// Appends a fresh copy of `g` with its dangling variables bound to `vars`.
pub(crate) fn inline_gadget<S: Field>(
    out: &mut CspInstance<S>,
    g: &Gadget<S>,
    vars: &[usize],
    names: &BTreeMap<String, String>,
) -> Result<(), ReduceError> {
    let mut map = vec![usize::MAX; g.instance.num_vars];
    for (&d, &v) in g.dangling.iter().zip(vars) {
        map[d] = v;
    }
    for slot in map.iter_mut().filter(|m| **m == usize::MAX) {
        *slot = out.fresh_var();
    }
    for c in &g.instance.constraints {
        let vs = c.vars.iter().map(|&u| map[u]).collect();
        out.add_constraint(&names[&c.func], vs)?;
    }
    Ok(())
}

/// Registers the gadget's functions in `out`, renaming on collision.
pub(crate) fn intern_gadget<S: Field>(out: &mut CspInstance<S>, g: &Gadget<S>) -> BTreeMap<String, String> {
    g.instance
        .functions
        .iter()
        .map(|(k, sig)| (k.clone(), out.intern_function(k, sig.clone())))
        .collect()
}

/// Replaces each occurrence of `func` by a copy of `g` without checking
/// what `g` realizes.
pub(crate) fn replace_with_gadget<S: Field>(
    inst: &CspInstance<S>,
    func: &str,
    g: &Gadget<S>,
) -> Result<CspInstance<S>, ReduceError> {
    let mut out = CspInstance::new(inst.num_vars);
    for (k, sig) in &inst.functions {
        if k != func {
            out.add_function(k, sig.clone())?;
        }
    }
    let names = intern_gadget(&mut out, g);
    for c in &inst.constraints {
        if c.func == func {
            inline_gadget(&mut out, g, &c.vars, &names)?;
        } else {
            out.add_constraint(&c.func, c.vars.clone())?;
        }
    }
    out.prune_functions();
    Ok(out)
}

fn check_growth<S: Field>(
    op: &str,
    before: &CspInstance<S>,
    after: &CspInstance<S>,
    occurrences: usize,
    g: &Gadget<S>,
) -> Result<(), ReduceError> {
    let (b, a) = (before.stats(), after.stats());
    let gm = g.instance.constraints.len();
    let gdeg = g.instance.max_degree();
    let n_ok = a.n <= b.n + occurrences * g.internal_count();
    let m_ok = a.m + occurrences <= b.m + occurrences * gm;
    let d_ok = a.delta <= b.delta.max(1) * gdeg.max(1);
    if n_ok && m_ok && d_ok {
        Ok(())
    } else {
        Err(ReduceError::verification(op, format!("size bound violated: {b:?} -> {a:?}")))
    }
}

/// Substitutes a gadget realizing `λ·F` for every occurrence of `F = func`.
/// Returns the new instance and the ledger `λ^{-occurrences}`, so that
/// `Z(inst) = ledger · Z(result)`.
pub fn substitute_gadget_scaled<S: Field>(
    inst: &CspInstance<S>,
    func: &str,
    g: &Gadget<S>,
    trace: &ReductionTrace,
) -> Result<(CspInstance<S>, S), ReduceError> {
    let target = inst
        .functions
        .get(func)
        .ok_or_else(|| ReduceError::Precondition(format!("unknown function `{func}`")))?;
    let realized = gadget_signature(g, DEFAULT_DANGLING_LIMIT)?;
    let lambda = sig_ratio(&realized, target).ok_or_else(|| ReduceError::SignatureMismatch {
        name: func.to_string(),
        detail: format!("gadget realizes {realized:?}, expected a multiple of {target:?}"),
    })?;
    let occ = inst.occurrences(func);
    let out = replace_with_gadget(inst, func, g)?;
    check_growth("substitute_gadget", inst, &out, occ, g)?;
    let ledger = lambda
        .inv()
        .expect("nonzero ratio")
        .pow(occ as u64);
    trace.record(
        TraceStep::new("substitute_gadget", inst.stats(), out.stats(), 0, ledger.to_scalar())
            .with_detail(json!({ "function": func, "occurrences": occ })),
    );
    Ok((out, ledger))
}

/// Substitutes a gadget realizing exactly `func`; `Z` is preserved.
pub fn substitute_gadget<S: Field>(
    inst: &CspInstance<S>,
    func: &str,
    g: &Gadget<S>,
    trace: &ReductionTrace,
) -> Result<CspInstance<S>, ReduceError> {
    let target = inst
        .functions
        .get(func)
        .ok_or_else(|| ReduceError::Precondition(format!("unknown function `{func}`")))?;
    let realized = gadget_signature(g, DEFAULT_DANGLING_LIMIT)?;
    if !sig_matches(&realized, target) {
        return Err(ReduceError::SignatureMismatch {
            name: func.to_string(),
            detail: format!("gadget realizes {realized:?}, expected {target:?}"),
        });
    }
    Ok(substitute_gadget_scaled(inst, func, g, trace)?.0)
}

/// Gadget of `r` parallel copies of `sig` on shared dangling variables.
pub(crate) fn parallel_gadget<S: Field>(name: &str, sig: &Signature<S>, r: usize) -> Gadget<S> {
    let k = sig.arity();
    let mut inst = CspInstance::new(k);
    inst.add_function(name, sig.clone()).expect("fresh instance");
    for _ in 0..r {
        inst.add_constraint(name, (0..k).collect()).expect("arity matches");
    }
    Gadget {
        instance: inst,
        dangling: (0..k).collect(),
    }
}

/// Replaces each occurrence of the binary `func` by `r` parallel copies of
/// itself, turning its table into the `r`-th entrywise power.
pub fn thicken<S: Field>(
    inst: &CspInstance<S>,
    func: &str,
    r: usize,
    trace: &ReductionTrace,
) -> Result<CspInstance<S>, ReduceError> {
    let sig = inst
        .functions
        .get(func)
        .ok_or_else(|| ReduceError::Precondition(format!("unknown function `{func}`")))?;
    if sig.arity() != 2 {
        return Err(ReduceError::Precondition(format!(
            "thickening needs a binary function, `{func}` has arity {}",
            sig.arity()
        )));
    }
    if r == 0 {
        return Err(ReduceError::Precondition("thickening factor must be at least 1".into()));
    }
    let g = parallel_gadget(func, sig, r);
    let out = replace_with_gadget(inst, func, &g)?;
    check_growth("thicken", inst, &out, inst.occurrences(func), &g)?;
    trace.record(
        TraceStep::new("thicken", inst.stats(), out.stats(), 0, S::one().to_scalar())
            .with_detail(json!({ "function": func, "copies": r })),
    );
    Ok(out)
}

/// Replaces each listed right-side `=₂` vertex by a path
/// `H, =₂, H, …, H` with `r` copies of `H`, realizing the matrix power
/// `H^r` between the vertex's two neighbours (port 0 side first).
pub fn stretch<S: Field>(
    grid: &BipartiteGrid<S>,
    vertices: &[usize],
    h: &Signature<S>,
    r: usize,
    trace: &ReductionTrace,
) -> Result<BipartiteGrid<S>, ReduceError> {
    grid.validate()?;
    if h.arity() != 2 {
        return Err(ReduceError::Precondition(format!(
            "path function must be binary, got arity {}",
            h.arity()
        )));
    }
    if r == 0 {
        return Err(ReduceError::Precondition("path length must be at least 1".into()));
    }
    let eq2 = Signature::equality(2);
    for &v in vertices {
        if v >= grid.sides.len() || grid.sides[v] != Side::Right || grid.grid.vertices[v] != eq2 {
            return Err(ReduceError::Precondition(format!(
                "vertex {v} is not a right-side =2 vertex"
            )));
        }
    }
    let mut out = grid.clone();
    let port_edges = grid.grid.port_edges();
    for &v in vertices {
        out.grid.vertices[v] = h.clone();
        let mut prev = v;
        for _ in 1..r {
            let link = out.add_vertex(eq2.clone(), Side::Left);
            let next = out.add_vertex(h.clone(), Side::Right);
            out.grid.add_edge((prev, 1), (link, 0));
            out.grid.add_edge((link, 1), (next, 0));
            prev = next;
        }
        // reattach the original port-1 edge to the end of the path
        let e = port_edges[v][1];
        for end in out.grid.edges[e].iter_mut() {
            if *end == (v, 1) {
                *end = (prev, 1);
            }
        }
    }
    out.validate()?;
    let (b, a) = (grid.stats(), out.stats());
    let k = vertices.len();
    if a.n > b.n + k * (r - 1) || a.m > b.m + k * (r - 1) || a.delta > b.delta.max(2) {
        return Err(ReduceError::verification("stretch", format!("size bound violated: {b:?} -> {a:?}")));
    }
    trace.record(
        TraceStep::new("stretch", b, a, 0, S::one().to_scalar())
            .with_detail(json!({ "vertices": vertices, "length": r })),
    );
    Ok(out)
}
