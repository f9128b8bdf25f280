//! Elimination of the pinning functions δ₀ = [1,0] and δ₁ = [0,1].

use std::collections::BTreeMap;

use serde_json::json;

use crate::instance::{CspInstance, Stats};
use crate::numeric::{Field, Mode};
use crate::signature::{gadget_signature, Gadget, Signature, DEFAULT_DANGLING_LIMIT};

use super::gadgets::{inline_gadget, intern_gadget};
use super::interp::{for_each_index, MAX_SYSTEM_SIZE};
use super::linalg::{kron_solve, Matrix};
use super::oracle::{query_all, OracleFn};
use super::trace::{max_stats, ReductionTrace, TraceStep};
use super::ReduceError;

/// Pins of an instance, separated from its other constraints.
struct PinSplit<S> {
    rest: CspInstance<S>,
    /// Pinned variables with their value, in variable order.
    pins: Vec<(usize, usize)>,
    contradictory: bool,
}

fn pin_value<S: Field>(sig: &Signature<S>) -> Option<usize> {
    (0..2).find(|&c| *sig == Signature::pin_unary(c))
}

fn split_pins<S: Field>(inst: &CspInstance<S>) -> PinSplit<S> {
    let mut rest = CspInstance::new(inst.num_vars);
    rest.functions = inst.functions.clone();
    let mut pinned: BTreeMap<usize, usize> = BTreeMap::new();
    let mut contradictory = false;
    for c in &inst.constraints {
        match pin_value(inst.signature_of(c)) {
            Some(v) => {
                if *pinned.entry(c.vars[0]).or_insert(v) != v {
                    contradictory = true;
                }
            }
            None => rest.constraints.push(c.clone()),
        }
    }
    rest.prune_functions();
    PinSplit {
        rest,
        pins: pinned.into_iter().collect(),
        contradictory,
    }
}

/// Renames each `from` variable to its `to` partner (following chains)
/// and deletes the `from` variables, renumbering the rest in order.
fn identify<S: Field>(inst: &CspInstance<S>, merges: &[(usize, usize)]) -> CspInstance<S> {
    let mut target: Vec<usize> = (0..inst.num_vars).collect();
    for &(from, to) in merges {
        target[from] = to;
    }
    // resolve chains such as v → t₁ → t₀
    for v in 0..inst.num_vars {
        let mut r = target[v];
        while target[r] != r {
            r = target[r];
        }
        target[v] = r;
    }
    let mut index = vec![usize::MAX; inst.num_vars];
    let mut next = 0;
    for v in 0..inst.num_vars {
        if target[v] == v {
            index[v] = next;
            next += 1;
        }
    }
    let mut out = CspInstance::new(next);
    out.functions = inst.functions.clone();
    for c in &inst.constraints {
        let vars = c.vars.iter().map(|&v| index[target[v]]).collect();
        out.constraints.push(crate::instance::Constraint {
            func: c.func.clone(),
            vars,
        });
    }
    out
}

/// Identifies all variables pinned to the same value; `Z` is unchanged.
pub(crate) fn merge_pinned_variables<S: Field>(inst: &CspInstance<S>) -> CspInstance<S> {
    let split = split_pins(inst);
    if split.contradictory {
        return inst.clone();
    }
    let mut base = split.rest;
    let mut rep: [Option<usize>; 2] = [None, None];
    let mut merges = Vec::new();
    for &(v, c) in &split.pins {
        match rep[c] {
            None => {
                rep[c] = Some(v);
                let name = base.intern_function(&format!("DELTA{c}"), Signature::pin_unary(c));
                base.add_constraint(&name, vec![v]).expect("unary pin");
            }
            Some(r) => merges.push((v, r)),
        }
    }
    identify(&base, &merges)
}

fn zero_result<S: Field>(op: &str, inst: &CspInstance<S>, trace: &ReductionTrace) -> S {
    trace.record(
        TraceStep::new(op, inst.stats(), inst.stats(), 0, S::one().to_scalar())
            .with_detail(json!({ "contradictory_pins": true })),
    );
    S::zero()
}

/// Method I (case 1): pinned variables are grouped into blocks of `d`; each
/// block's 0-pinned and 1-pinned variables are merged into `t₀`, `t₁`, and
/// one of four binary functions built from `f` is attached to each pair:
/// nothing, a merge, `f` fed by `t_τ`, or merge plus `f`. The value with
/// `(t₀,t₁) = (0,1)` in every block is recovered by block interpolation.
pub fn eliminate_pins_blockinterp<S: Field>(
    inst: &CspInstance<S>,
    f: &Signature<S>,
    d: usize,
    oracle: OracleFn<S>,
    trace: &ReductionTrace,
) -> Result<S, ReduceError> {
    const OP: &str = "eliminate_pins_blockinterp";
    if S::MODE != Mode::Exact {
        return Err(ReduceError::Precondition("pin elimination requires exact mode".into()));
    }
    if d == 0 {
        return Err(ReduceError::Precondition("block size must be at least 1".into()));
    }
    let k = f.arity();
    let all = (1usize << k) - 1;
    if k == 0 || f.value(0) == f.value(all) {
        return Err(ReduceError::Precondition("F(0…0) must differ from F(1…1)".into()));
    }
    let tau = (0..=all)
        .find(|&t| f.value(t) != f.value(t ^ all))
        .ok_or_else(|| ReduceError::Precondition("no τ with F(τ) ≠ F(τ̄)".into()))?;
    let split = split_pins(inst);
    if split.contradictory {
        return Ok(zero_result(OP, inst, trace));
    }
    let before = inst.stats();
    if split.pins.is_empty() {
        let z = oracle(&split.rest)?;
        trace.record(TraceStep::new(OP, before, split.rest.stats(), 1, S::one().to_scalar()));
        return Ok(z);
    }

    // merge each block's pinned variables into (t0, t1)
    let mut base = split.rest.clone();
    let blocks: Vec<&[(usize, usize)]> = split.pins.chunks(d).collect();
    let mut merges = Vec::new();
    let mut pairs = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let mut t = [None, None];
        for &(v, c) in *block {
            match t[c] {
                None => t[c] = Some(v),
                Some(r) => merges.push((v, r)),
            }
        }
        let t0 = t[0].unwrap_or_else(|| base.fresh_var());
        let t1 = t[1].unwrap_or_else(|| base.fresh_var());
        pairs.push((t0, t1));
    }
    let fname = base.intern_function("F", f.clone());

    if blocks.len() > 8 {
        return Err(ReduceError::Precondition("too many pin blocks for one system".into()));
    }
    debug_assert!(4usize.pow(blocks.len() as u32) <= MAX_SYSTEM_SIZE);
    let dims = vec![4usize; blocks.len()];
    let mut instances = Vec::new();
    for_each_index(&dims, |idx| {
        let mut g = base.clone();
        let mut local = merges.clone();
        for (&y, &(t0, t1)) in idx.iter().zip(&pairs) {
            let inputs: Vec<usize> = (0..k)
                .map(|j| if (tau >> (k - 1 - j)) & 1 == 1 { t1 } else { t0 })
                .collect();
            if y == 1 || y == 3 {
                local.push((t1, t0));
            }
            if y >= 2 {
                g.add_constraint(&fname, inputs).expect("arity");
            }
        }
        let mut g = identify(&g, &local);
        g.prune_functions();
        instances.push(g);
    });
    let (f0, f1) = (f.value(0).clone(), f.value(all).clone());
    let (ft, fb) = (f.value(tau).clone(), f.value(tau ^ all).clone());
    let (o, z) = (S::one(), S::zero());
    let m: Matrix<S> = vec![
        vec![o.clone(), o.clone(), o.clone(), o.clone()],
        vec![o.clone(), z.clone(), z.clone(), o.clone()],
        vec![f0.clone(), ft, fb, f1.clone()],
        vec![f0, z.clone(), z, f1],
    ];
    let det = (f.value(all).clone() - f.value(0).clone())
        * (f.value(tau ^ all).clone() - f.value(tau).clone());
    if det.is_zero() {
        return Err(ReduceError::Singular("4×4 pin block matrix".into()));
    }
    let values = query_all(oracle, &instances)?;
    let rho = kron_solve(&vec![m; blocks.len()], &values, 0.0)?;
    // T = (0,1) is column 1 in every block
    let pos = (0..blocks.len()).fold(0usize, |acc, _| acc * 4 + 1);
    let after = instances.iter().map(|g| g.stats()).fold(Stats::default(), max_stats);
    trace.record(
        TraceStep::new(OP, before, after, instances.len(), S::one().to_scalar()).with_detail(json!({
            "pins": split.pins.len(),
            "blocks": blocks.len(),
            "tau": tau,
            "determinant": det.to_string(),
        })),
    );
    Ok(rho[pos].clone())
}

/// A one-dangling-variable gadget realizing `[a, b]` with `a ≠ b`.
#[derive(Debug, Clone)]
pub struct PinGadget<S> {
    pub gadget: Gadget<S>,
    pub a: S,
    pub b: S,
    pub examined: usize,
}

/// Label strings over `len` positions where label 0 is the dangling
/// variable and internal labels appear in first-occurrence order.
fn labelings(len: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, len: usize, next: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == len {
            if cur.contains(&0) {
                out.push(cur.clone());
            }
            return;
        }
        for l in 0..=next {
            cur.push(l);
            go(i + 1, len, if l == next { next + 1 } else { next }, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, len, 1, &mut Vec::new(), &mut out);
    out
}

/// Searches one- then two-constraint gadgets over `family` for a unary
/// `[a, b]` with `a ≠ b`, examining at most `budget` candidates.
pub(crate) fn find_pin_gadget<S: Field>(
    family: &[Signature<S>],
    budget: usize,
) -> Result<PinGadget<S>, ReduceError> {
    let mut examined = 0;
    let mut shapes: Vec<Vec<usize>> = (0..family.len()).map(|i| vec![i]).collect();
    for i in 0..family.len() {
        for j in i..family.len() {
            shapes.push(vec![i, j]);
        }
    }
    for shape in shapes {
        let arities: Vec<usize> = shape.iter().map(|&i| family[i].arity()).collect();
        let len: usize = arities.iter().sum();
        if len == 0 || len > 8 {
            continue;
        }
        for labels in labelings(len) {
            if examined >= budget {
                return Err(ReduceError::BudgetExhausted(format!(
                    "no gadget [a,b] with a ≠ b among {examined} candidates"
                )));
            }
            examined += 1;
            let nvars = labels.iter().max().unwrap() + 1;
            let mut g = CspInstance::new(nvars);
            let mut at = 0;
            for (&fi, &k) in shape.iter().zip(&arities) {
                let name = format!("F{fi}");
                g.add_function(&name, family[fi].clone()).expect("fresh name");
                g.add_constraint(&name, labels[at..at + k].to_vec()).expect("arity");
                at += k;
            }
            let gadget = Gadget::new(g, vec![0])?;
            let sig = gadget_signature(&gadget, DEFAULT_DANGLING_LIMIT)?;
            let (a, b) = (sig.value(0).clone(), sig.value(1).clone());
            if a != b {
                return Ok(PinGadget { gadget, a, b, examined });
            }
        }
    }
    Err(ReduceError::BudgetExhausted(format!(
        "no gadget [a,b] with a ≠ b among {examined} candidates of at most two constraints"
    )))
}

/// Method II: each pin is expanded as
/// `δ₀ = ([a,b] − b·[1,1])/(a−b)` or `δ₁ = (a·[1,1] − [a,b])/(a−b)`, where
/// `[a,b]` is a pin-free gadget found by search; the `2^p` resulting
/// pin-free instances are evaluated by the oracle and recombined.
pub fn eliminate_pins_blackbox<S: Field>(
    inst: &CspInstance<S>,
    family: &[Signature<S>],
    budget: usize,
    oracle: OracleFn<S>,
    trace: &ReductionTrace,
) -> Result<S, ReduceError> {
    const OP: &str = "eliminate_pins_blackbox";
    if S::MODE != Mode::Exact {
        return Err(ReduceError::Precondition("pin elimination requires exact mode".into()));
    }
    let split = split_pins(inst);
    if split.contradictory {
        return Ok(zero_result(OP, inst, trace));
    }
    let before = inst.stats();
    let p = split.pins.len();
    if p > 16 {
        return Err(ReduceError::Precondition(format!("{p} pins exceed the bound of 16")));
    }
    if p == 0 {
        let z = oracle(&split.rest)?;
        trace.record(TraceStep::new(OP, before, split.rest.stats(), 1, S::one().to_scalar()));
        return Ok(z);
    }
    let pg = find_pin_gadget(family, budget)?;
    let inv = (pg.a.clone() - pg.b.clone()).inv().expect("a ≠ b");
    // coefficients of (gadget, all-ones) for δ₀ and δ₁
    let coef = [
        [inv.clone(), S::zero() - pg.b.clone() * inv.clone()],
        [S::zero() - inv.clone(), pg.a.clone() * inv],
    ];
    let mut base = split.rest.clone();
    let names = intern_gadget(&mut base, &pg.gadget);
    let mut instances = Vec::new();
    let mut weights = Vec::new();
    for choice in 0..1usize << p {
        let mut w = S::one();
        for (j, &(_, c)) in split.pins.iter().enumerate() {
            let use_gadget = (choice >> (p - 1 - j)) & 1 == 0;
            w = w * coef[c][usize::from(!use_gadget)].clone();
        }
        if w.is_zero() {
            continue;
        }
        let mut g = base.clone();
        for (j, &(v, _)) in split.pins.iter().enumerate() {
            if (choice >> (p - 1 - j)) & 1 == 0 {
                inline_gadget(&mut g, &pg.gadget, &[v], &names)?;
            }
        }
        g.prune_functions();
        instances.push(g);
        weights.push(w);
    }
    let calls = instances.len();
    if calls > 1 << p {
        return Err(ReduceError::verification(OP, "oracle calls exceed 2^p"));
    }
    let values = query_all(oracle, &instances)?;
    let z = values
        .into_iter()
        .zip(weights)
        .fold(S::zero(), |acc, (v, w)| acc + v * w);
    let after = instances.iter().map(|g| g.stats()).fold(Stats::default(), max_stats);
    trace.record(
        TraceStep::new(OP, before, after, calls, S::one().to_scalar()).with_detail(json!({
            "pins": p,
            "gadget": [pg.a.to_string(), pg.b.to_string()],
            "candidates_examined": pg.examined,
        })),
    );
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::brute_force;
    use crate::numeric::ExactComplex;
    use crate::reduce::CountingOracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type E = ExactComplex;
    type Sig = Signature<E>;

    fn pinned_or(pins: &[(usize, usize)]) -> CspInstance<E> {
        let mut inst = CspInstance::from_graph(2, &[(0, 1)], "OR2", Sig::or2()).unwrap();
        for &(v, c) in pins {
            let name = format!("DELTA{c}");
            inst.add_function(&name, Sig::pin_unary(c)).unwrap();
            inst.add_constraint(&name, vec![v]).unwrap();
        }
        inst
    }

    fn random_pinned(rng: &mut ChaCha8Rng) -> CspInstance<E> {
        let n = rng.gen_range(2..=6);
        let edges: Vec<(usize, usize)> = (0..rng.gen_range(1..=7))
            .map(|_| {
                let u = rng.gen_range(0..n);
                (u, (u + rng.gen_range(1..n)) % n)
            })
            .collect();
        let mut inst = CspInstance::from_graph(n, &edges, "OR2", Sig::or2()).unwrap();
        for _ in 0..rng.gen_range(0..=3) {
            let c = rng.gen_range(0..2);
            let name = format!("DELTA{c}");
            inst.add_function(&name, Sig::pin_unary(c)).unwrap();
            inst.add_constraint(&name, vec![rng.gen_range(0..n)]).unwrap();
        }
        inst
    }

    #[test]
    fn blackbox_single_pins() {
        let fam = [Sig::or2()];
        let o = CountingOracle::restricted(fam.to_vec());
        let eval = |i: &CspInstance<E>| o.eval(i);
        let t = ReductionTrace::new();
        let z0 = eliminate_pins_blackbox(&pinned_or(&[(0, 0)]), &fam, 100, &eval, &t).unwrap();
        let z1 = eliminate_pins_blackbox(&pinned_or(&[(0, 1)]), &fam, 100, &eval, &t).unwrap();
        assert_eq!((z0, z1), (E::from_int(1), E::from_int(2)));
    }

    #[test]
    fn blackbox_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fam = [Sig::or2()];
        for _ in 0..20 {
            let inst = random_pinned(&mut rng);
            let o = CountingOracle::restricted(fam.to_vec());
            let t = ReductionTrace::new();
            let z = eliminate_pins_blackbox(&inst, &fam, 100, &|i| o.eval(i), &t).unwrap();
            assert_eq!(z, brute_force(&inst, 24).unwrap());
            let p = split_pins(&inst).pins.len();
            assert!(o.calls() <= 1 << p);
        }
    }

    #[test]
    fn blockinterp_single_pins_each_kind() {
        let f = Sig::or2();
        let o = CountingOracle::restricted(vec![f.clone()]);
        let inst = pinned_or(&[(0, 0), (1, 1)]);
        let z = eliminate_pins_blockinterp(&inst, &f, 2, &|i| o.eval(i), &ReductionTrace::new());
        assert_eq!(z.unwrap(), brute_force(&inst, 24).unwrap());
    }

    #[test]
    fn blockinterp_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Sig::or2();
        for _ in 0..10 {
            let inst = random_pinned(&mut rng);
            let o = CountingOracle::restricted(vec![f.clone()]);
            let z = eliminate_pins_blockinterp(&inst, &f, 2, &|i| o.eval(i), &ReductionTrace::new());
            assert_eq!(z.unwrap(), brute_force(&inst, 24).unwrap());
        }
    }

    #[test]
    fn zero_pins_pass_through() {
        let inst = pinned_or(&[]);
        let o = CountingOracle::restricted(vec![Sig::or2()]);
        let z = eliminate_pins_blockinterp(&inst, &Sig::or2(), 1, &|i| o.eval(i), &ReductionTrace::new());
        assert_eq!(z.unwrap(), E::from_int(3));
        assert_eq!(o.calls(), 1);
    }

    #[test]
    fn blockinterp_rejects_symmetric_f() {
        // [1,0,1] has F(00) = F(11)
        let f = Sig::symmetric_ints(&[1, 0, 1]).unwrap();
        let r = eliminate_pins_blockinterp(&pinned_or(&[(0, 0)]), &f, 1, &|_| Ok(E::zero()), &ReductionTrace::new());
        assert!(matches!(r, Err(ReduceError::Precondition(_))));
    }

    #[test]
    fn merged_pins_preserve_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let inst = random_pinned(&mut rng);
            let merged = merge_pinned_variables(&inst);
            assert_eq!(brute_force(&merged, 24).unwrap(), brute_force(&inst, 24).unwrap());
        }
    }
}
