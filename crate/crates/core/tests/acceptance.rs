//! Acceptance suite. Each criterion is checked against an oracle written
//! here independently of the library (exhaustive enumeration over
//! assignments, edges, vertex subsets or class members) and reported as one
//! PASS/FAIL line. The process fails if any criterion fails.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cspkit::classify::{in_a, in_p};
use cspkit::instance::{eval_ve, holant_to_csp, BipartiteGrid, CspInstance, HolantGrid, Side, DEFAULT_WIDTH_CAP};
use cspkit::numeric::{ApproxComplex, ExactComplex, Field};
use cspkit::reduce::{
    eliminate_pins_blackbox, eliminate_pins_blockinterp, equality_tree_rewrite, holographic_transform,
    interpolate_block, interpolate_eq2_from_h, interpolate_vanilla, lemma43_gadgets, local_transform_m,
    verify_pipeline, CountingOracle, PipelineConfig, ReduceError, ReductionTrace,
};
use cspkit::signature::Signature;
use cspkit::tracteval::{affine_witnesses, eval_affine, eval_product, product_witnesses};

type E = ExactComplex;
type A = ApproxComplex;
type Sig = Signature<E>;

/// Relative error allowed for the approximate Jordan/diagonal interpolation.
const LEMMA51_REL_TOL: f64 = 1e-6;
/// Wall-clock limit for the tractable-evaluator sweep.
const TRACTABLE_TIME_LIMIT: Duration = Duration::from_secs(60);
/// Wall-clock limit for the end-to-end pipeline runs.
const PIPELINE_TIME_LIMIT: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn int(v: i64) -> E {
    E::from_int(v)
}

// ---------------------------------------------------------------------------
// independent oracles

/// `Σ_x Π_c f_c(x|vars)` by enumerating all assignments.
fn naive_csp<S: Field>(inst: &CspInstance<S>) -> S {
    let mut total = S::zero();
    for x in 0..1usize << inst.num_vars {
        let mut term = S::one();
        for c in &inst.constraints {
            let bits: Vec<usize> = c.vars.iter().map(|&v| (x >> v) & 1).collect();
            term = term * inst.functions[&c.func].eval(&bits).clone();
            if term.is_zero() {
                break;
            }
        }
        total = total + term;
    }
    total
}

/// `Σ_σ Π_v f_v(σ|ports)` by enumerating all edge assignments.
fn naive_holant<S: Field>(grid: &HolantGrid<S>) -> S {
    let ports = grid.port_edges();
    let mut total = S::zero();
    for x in 0..1usize << grid.edges.len() {
        let mut term = S::one();
        for (v, sig) in grid.vertices.iter().enumerate() {
            let bits: Vec<usize> = ports[v].iter().map(|&e| (x >> e) & 1).collect();
            term = term * sig.eval(&bits).clone();
            if term.is_zero() {
                break;
            }
        }
        total = total + term;
    }
    total
}

/// Integer Holant value by edge enumeration; every entry must be an integer.
fn naive_holant_int(grid: &HolantGrid<E>) -> i128 {
    let tables: Vec<Vec<i128>> = grid
        .vertices
        .iter()
        .map(|s| {
            s.values()
                .iter()
                .map(|v| v.as_rational().and_then(|r| r.to_integer().to_i128()).expect("integer entry"))
                .collect()
        })
        .collect();
    let ports = grid.port_edges();
    let mut total = 0i128;
    for x in 0..1usize << grid.edges.len() {
        let mut term = 1i128;
        for (v, t) in tables.iter().enumerate() {
            let idx = ports[v].iter().fold(0usize, |acc, &e| acc * 2 + ((x >> e) & 1));
            term *= t[idx];
            if term == 0 {
                break;
            }
        }
        total += term;
    }
    total
}

/// Number of vertex covers, by enumerating vertex subsets.
fn count_vertex_covers(n: usize, edges: &[(usize, usize)]) -> i64 {
    (0..1usize << n)
        .filter(|s| edges.iter().all(|&(u, v)| (s >> u) & 1 == 1 || (s >> v) & 1 == 1))
        .count() as i64
}

/// Powers of i in table form: 0 is the zero value, 1..=4 are i^0..i^3.
fn code_value(c: u8) -> E {
    if c == 0 {
        E::zero()
    } else {
        E::i_pow(c as i64 - 1)
    }
}

/// Every table of arity `k` of the form `χ_S(x)·i^{c + Σ a_j x_j + 2Σ b_jl x_j x_l}`
/// with `S` an affine subspace, written in the original coordinates.
fn affine_class_tables(k: usize) -> HashSet<Vec<u8>> {
    let size = 1usize << k;
    let mut subspaces = Vec::new();
    for mask in 1u32..(1u32 << size) {
        let pts: Vec<usize> = (0..size).filter(|&p| (mask >> p) & 1 == 1).collect();
        let closed = pts.iter().all(|&a| {
            pts.iter()
                .all(|&b| pts.iter().all(|&c| (mask >> (a ^ b ^ c)) & 1 == 1))
        });
        if closed {
            subspaces.push(pts);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|j| (j + 1..k).map(move |l| (j, l))).collect();
    let mut out = HashSet::new();
    out.insert(vec![0u8; size]);
    for pts in &subspaces {
        for c in 0..4u32 {
            for a in 0..4u32.pow(k as u32) {
                for b in 0..1u32 << pairs.len() {
                    let mut table = vec![0u8; size];
                    for &x in pts {
                        // input j is bit (k-1-j) of the table index
                        let bit = |j: usize| ((x >> (k - 1 - j)) & 1) as u32;
                        let mut e = c;
                        for j in 0..k {
                            e += ((a / 4u32.pow(j as u32)) % 4) * bit(j);
                        }
                        for (t, &(j, l)) in pairs.iter().enumerate() {
                            e += 2 * ((b >> t) & 1) * bit(j) * bit(l);
                        }
                        table[x] = (e % 4) as u8 + 1;
                    }
                    out.insert(table);
                }
            }
        }
    }
    out
}

fn random_scalar(rng: &mut ChaCha8Rng) -> E {
    match rng.gen_range(0..8) {
        0 => E::zero(),
        1 => E::i(),
        2 => E::omega(),
        3 => E::from_ratio(1, 2),
        4 => E::i() + int(1),
        _ => int(rng.gen_range(-2..=3)),
    }
}

/// A random product of unaries, `=₂` and `≠₂` with a random scale.
fn random_product(rng: &mut ChaCha8Rng, k: usize) -> Sig {
    enum F {
        U(usize, E, E),
        Eq(usize, usize),
        Neq(usize, usize),
    }
    let mut factors = Vec::new();
    for _ in 0..rng.gen_range(0..=k + 1) {
        let j = rng.gen_range(0..k);
        let l = rng.gen_range(0..k);
        factors.push(match rng.gen_range(0..3) {
            0 => F::U(j, random_scalar(rng), random_scalar(rng)),
            1 if j != l => F::Eq(j, l),
            2 if j != l => F::Neq(j, l),
            _ => F::U(j, int(1), random_scalar(rng)),
        });
    }
    let scale = random_scalar(rng);
    Sig::from_fn(k, |x| {
        factors.iter().fold(scale.clone(), |acc, f| match f {
            F::U(j, a, b) => acc * if x[*j] == 0 { a.clone() } else { b.clone() },
            F::Eq(j, l) => acc * int(i64::from(x[*j] == x[*l])),
            F::Neq(j, l) => acc * int(i64::from(x[*j] != x[*l])),
        })
    })
    .unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng, pick: &mut dyn FnMut(&mut ChaCha8Rng, usize) -> Sig) -> CspInstance<E> {
    let n = rng.gen_range(1..=12);
    let mut inst = CspInstance::new(n);
    for t in 0..rng.gen_range(1..=10) {
        let k = rng.gen_range(1..=3.min(n));
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(rng);
        vars.truncate(k);
        let name = format!("f{t}");
        inst.add_function(&name, pick(rng, k)).unwrap();
        inst.add_constraint(&name, vars).unwrap();
    }
    inst
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(2..=max_n);
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    all.shuffle(rng);
    let m = rng.gen_range(1..=max_m.min(all.len()));
    all.truncate(m);
    (n, all)
}

/// Bipartite grid whose left and right vertex arities are drawn from the
/// given generators, with ports matched at random.
fn random_grid<S: Field>(
    rng: &mut ChaCha8Rng,
    edges: usize,
    left: &mut dyn FnMut(&mut ChaCha8Rng, usize) -> Signature<S>,
    right: &mut dyn FnMut(&mut ChaCha8Rng, usize) -> Signature<S>,
    max_left_arity: usize,
) -> BipartiteGrid<S> {
    let mut g = BipartiteGrid {
        grid: HolantGrid::new(),
        sides: Vec::new(),
    };
    let side_ports = |g: &mut BipartiteGrid<S>,
                          rng: &mut ChaCha8Rng,
                          side: Side,
                          max: usize,
                          gen: &mut dyn FnMut(&mut ChaCha8Rng, usize) -> Signature<S>| {
        let mut ports = Vec::new();
        while ports.len() < edges {
            let k = rng.gen_range(1..=max).min(edges - ports.len());
            let v = g.add_vertex(gen(rng, k), side);
            ports.extend((0..k).map(|p| (v, p)));
        }
        ports
    };
    let lp = side_ports(&mut g, rng, Side::Left, max_left_arity, left);
    let mut rp = side_ports(&mut g, rng, Side::Right, 3, right);
    rp.shuffle(rng);
    for (a, b) in lp.into_iter().zip(rp) {
        g.grid.add_edge(a, b);
    }
    g.validate().unwrap();
    g
}

fn int_sig(rng: &mut ChaCha8Rng, k: usize) -> Sig {
    Sig::new(k, (0..1 << k).map(|_| int(rng.gen_range(-2..=3))).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// criteria

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let tables: Vec<Vec<Vec<u8>>> = (0..=3)
        .map(|k| {
            let mut v: Vec<Vec<u8>> = affine_class_tables(k).into_iter().collect();
            v.sort();
            v
        })
        .collect();
    for t in 0..200 {
        let inst = random_instance(&mut rng, &mut |rng, k| {
            let table = tables[k].choose(rng).unwrap();
            Sig::new(k, table.iter().map(|&c| code_value(c)).collect()).unwrap()
        });
        let w = affine_witnesses(&inst).map_err(|e| format!("A instance {t}: {e}"))?;
        let z = eval_affine(&inst, &w).map_err(|e| e.to_string())?;
        ensure(z == naive_csp(&inst), || format!("A instance {t}: {z} vs enumeration"))?;
    }
    for t in 0..200 {
        let inst = random_instance(&mut rng, &mut random_product);
        let w = product_witnesses(&inst).map_err(|e| format!("P instance {t}: {e}"))?;
        let z = eval_product(&inst, &w).map_err(|e| e.to_string())?;
        ensure(z == naive_csp(&inst), || format!("P instance {t}: {z} vs enumeration"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < TRACTABLE_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("200 A and 200 P instances exact, {:.1} s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let mut swept = 0usize;
    for k in 1..=3usize {
        let class = affine_class_tables(k);
        let size = 1usize << k;
        let values: Vec<E> = (0..5).map(code_value).collect();
        for code in 0..5usize.pow(size as u32) {
            let table: Vec<u8> = (0..size).map(|j| ((code / 5usize.pow(j as u32)) % 5) as u8).collect();
            let f = Sig::new(k, table.iter().map(|&c| values[c as usize].clone()).collect()).unwrap();
            let got = in_a(&f, false);
            ensure(got.is_some() == class.contains(&table), || {
                format!("in_A disagrees with enumeration on {f:?}")
            })?;
            if let Some(w) = got {
                ensure(w.verify(&f), || format!("A witness fails to rebuild {f:?}"))?;
            }
            swept += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..1000 {
        let k = rng.gen_range(1..=4);
        let f = random_product(&mut rng, k);
        let w = in_p(&f).ok_or_else(|| format!("generated product rejected: {f:?}"))?;
        ensure(w.rebuild() == f, || format!("P witness does not re-multiply to {f:?}"))?;
    }
    let grid = [int(0), int(1), int(-1), int(2), E::i()];
    let mut binaries = 0;
    for a in &grid {
        for b in &grid {
            for c in &grid {
                for d in &grid {
                    let f = Sig::binary(a.clone(), b.clone(), c.clone(), d.clone());
                    let degenerate = (a.clone() * d.clone() - b.clone() * c.clone()).is_zero();
                    let diagonal = b.is_zero() && c.is_zero();
                    let anti = a.is_zero() && d.is_zero();
                    ensure(in_p(&f).is_some() == (degenerate || diagonal || anti), || {
                        format!("binary in_P wrong on {f:?}")
                    })?;
                    binaries += 1;
                }
            }
        }
    }
    Ok(format!(
        "{swept} tables of arity 1..3 agree with the class enumeration; 1000/1000 products; {binaries} binaries"
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let base = Sig::symmetric_ints(&[0, 1, 2]).unwrap();
    let mut calls = [0usize; 4];
    for t in 0..20 {
        let (n, edges) = random_graph(&mut rng, 8, 14);
        let inst = CspInstance::from_graph(n, &edges, "VC", Sig::or2()).unwrap();
        let expected = int(count_vertex_covers(n, &edges));
        let delta = inst.stats().delta;
        let oracle = CountingOracle::restricted(vec![base.clone()]);
        let f = |i: &CspInstance<E>| oracle.eval(i);
        let z = interpolate_vanilla(&inst, "VC", &base, &f, &ReductionTrace::new()).map_err(|e| e.to_string())?;
        ensure(z == expected, || format!("graph {t}: vanilla gave {z}, expected {expected}"))?;
        calls[0] += oracle.calls();
        for d in 1..=3 {
            let oracle = CountingOracle::restricted(vec![base.clone()]);
            let f = |i: &CspInstance<E>| oracle.eval(i);
            let trace = ReductionTrace::new();
            let z = interpolate_block(&inst, "VC", &base, d, &f, &trace).map_err(|e| e.to_string())?;
            ensure(z == expected, || format!("graph {t}, d = {d}: gave {z}, expected {expected}"))?;
            calls[d] += oracle.calls();
            for s in trace.steps() {
                ensure(s.after.n == s.before.n && s.after.m <= (d + 1) * s.before.m, || {
                    format!("graph {t}, d = {d}: size {:?} -> {:?}", s.before, s.after)
                })?;
                ensure(s.after.delta <= (d + 1) * delta, || {
                    format!("graph {t}, d = {d}: degree {} exceeds (d+1)·{delta}", s.after.delta)
                })?;
            }
        }
    }
    Ok(format!(
        "20 graphs; oracle calls vanilla {}, d=1 {}, d=2 {}, d=3 {}",
        calls[0], calls[1], calls[2], calls[3]
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let or2 = Sig::or2();
    let mut max_calls = 0;
    for t in 0..20 {
        let (n, edges) = random_graph(&mut rng, 7, 9);
        let mut inst = CspInstance::from_graph(n, &edges, "OR2", or2.clone()).unwrap();
        let p = rng.gen_range(1..=3.min(n));
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(&mut rng);
        for &v in &vars[..p] {
            let c = rng.gen_range(0..2);
            let name = format!("DELTA{c}");
            inst.add_function(&name, Sig::pin_unary(c)).ok();
            inst.add_constraint(&name, vec![v]).unwrap();
        }
        let expected = naive_csp(&inst);
        for d in 1..=2 {
            let oracle = CountingOracle::restricted(vec![or2.clone()]);
            let f = |i: &CspInstance<E>| oracle.eval(i);
            let z = eliminate_pins_blockinterp(&inst, &or2, d, &f, &ReductionTrace::new()).map_err(|e| e.to_string())?;
            ensure(z == expected, || format!("instance {t}: Method I (d = {d}) gave {z}, expected {expected}"))?;
        }
        let oracle = CountingOracle::restricted(vec![or2.clone()]);
        let f = |i: &CspInstance<E>| oracle.eval(i);
        let z = eliminate_pins_blackbox(&inst, &[or2.clone()], 10_000, &f, &ReductionTrace::new())
            .map_err(|e| e.to_string())?;
        ensure(z == expected, || format!("instance {t}: Method II gave {z}, expected {expected}"))?;
        ensure(oracle.calls() <= 1 << p, || format!("instance {t}: {} calls for {p} pins", oracle.calls()))?;
        max_calls = max_calls.max(oracle.calls());
    }
    Ok(format!("20 instances, both methods exact; Method II used at most {max_calls} calls"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let eq = |_: &mut ChaCha8Rng, k: usize| Sig::equality(k);
    for t in 0..20 {
        let e = rng.gen_range(3..=8);
        let g = random_grid(&mut rng, e, &mut int_sig, &mut int_sig, 3);
        let tm = loop {
            let m: Vec<E> = (0..4).map(|_| int(rng.gen_range(-2..=2))).collect();
            if !(m[0].clone() * m[3].clone() - m[1].clone() * m[2].clone()).is_zero() {
                break [[m[0].clone(), m[1].clone()], [m[2].clone(), m[3].clone()]];
            }
        };
        let out = holographic_transform(&g, &tm, &ReductionTrace::new()).map_err(|e| e.to_string())?;
        ensure(naive_holant(&out.grid) == naive_holant(&g.grid), || format!("grid {t}: holographic value changed"))?;
    }
    for t in 0..20 {
        let e = rng.gen_range(3..=8);
        let g = random_grid(&mut rng, e, &mut eq.clone(), &mut int_sig, 3);
        let (out, ledger) = local_transform_m(&g, &ReductionTrace::new()).map_err(|e| e.to_string())?;
        ensure(ledger * naive_holant(&out.grid) == naive_holant(&g.grid), || {
            format!("grid {t}: local transform value changed")
        })?;
    }
    let mut rewritten = 0;
    for t in 0..20 {
        let e = rng.gen_range(4..=10);
        let g = random_grid(&mut rng, e, &mut eq.clone(), &mut int_sig, 7);
        let bound: usize = g
            .vertices_on(Side::Left)
            .iter()
            .map(|&v| g.grid.vertices[v].arity())
            .filter(|&k| k > 3)
            .map(|k| 3 * (k - 1))
            .sum();
        let before = g.grid.vertices.len();
        let big = g.vertices_on(Side::Left).iter().filter(|&&v| g.grid.vertices[v].arity() > 3).count();
        let out = equality_tree_rewrite(&g, &ReductionTrace::new()).map_err(|e| e.to_string())?;
        ensure(out.grid.vertices.iter().all(|s| s.arity() <= 3), || format!("grid {t}: arity above 3 remains"))?;
        ensure(out.grid.vertices.len() <= before + bound, || {
            format!("grid {t}: {} vertices exceed {before} + {bound}", out.grid.vertices.len())
        })?;
        ensure(naive_holant_int(&out.grid) == naive_holant_int(&g.grid), || {
            format!("grid {t}: equality tree changed the value")
        })?;
        rewritten += big;
    }
    Ok(format!("60 grids exact; {rewritten} equalities of arity above 3 rewritten"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let a = |x: f64| A::new(x, 0.0);
    let cases: Vec<(&str, Signature<A>)> = vec![
        ("diagonalizable", Signature::binary(a(2.0), a(1.0), a(1.0), a(2.0))),
        ("diagonalizable with ratio -1", Signature::binary(a(1.0), a(2.0), a(0.5), a(-1.0))),
        ("jordan", Signature::binary(a(1.0), a(1.0), a(0.0), a(1.0))),
    ];
    let oracle = |g: &BipartiteGrid<A>| -> Result<A, ReduceError> { Ok(eval_ve(&holant_to_csp(&g.grid)?, DEFAULT_WIDTH_CAP)?) };
    let mut worst = 0.0f64;
    let mut runs = 0;
    for (kind, h) in &cases {
        for t in 0..10 {
            let mut g = BipartiteGrid {
                grid: HolantGrid::new(),
                sides: Vec::new(),
            };
            let k = rng.gen_range(1..=3);
            let mut right = Vec::new();
            let mut designated = Vec::new();
            for _ in 0..k {
                let v = g.add_vertex(Signature::equality(2), Side::Right);
                designated.push(v);
                right.extend([(v, 0), (v, 1)]);
            }
            while right.len() < 10 && rng.gen_bool(0.6) {
                let ar = rng.gen_range(1..=2).min(10 - right.len());
                let vals = (0..1 << ar).map(|_| a(rng.gen_range(-2..=3) as f64)).collect();
                let v = g.add_vertex(Signature::new(ar, vals).unwrap(), Side::Right);
                right.extend((0..ar).map(|p| (v, p)));
            }
            right.shuffle(&mut rng);
            let mut i = 0;
            while i < right.len() {
                let ar = rng.gen_range(1..=3).min(right.len() - i);
                let v = g.add_vertex(Signature::equality(ar), Side::Left);
                for p in 0..ar {
                    g.grid.add_edge((v, p), right[i]);
                    i += 1;
                }
            }
            let expected = naive_holant(&g.grid);
            let z = interpolate_eq2_from_h(&g, &designated, h, 2, &oracle, &ReductionTrace::new())
                .map_err(|e| format!("{kind} grid {t}: {e}"))?;
            let err = (z.0 - expected.0).norm() / expected.0.norm().max(1.0);
            worst = worst.max(err);
            ensure(err <= LEMMA51_REL_TOL, || format!("{kind} grid {t}: relative error {err:.2e}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} grids with at most 10 edges; worst relative error {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let nonzero = |rng: &mut ChaCha8Rng| -> E {
        match rng.gen_range(0..6) {
            0 => E::i(),
            1 => E::from_ratio(rng.gen_range(1..=5), rng.gen_range(1..=4)),
            _ => int(rng.gen_range(1..=4) * if rng.gen() { 1 } else { -1 }),
        }
    };
    let mut done = [0usize; 2];
    while done.iter().any(|&c| c < 10) {
        let (b, c) = (nonzero(&mut rng), nonzero(&mut rng));
        let bc = b.clone() * c.clone();
        let second = done[0] >= 10 || (done[1] < 10 && rng.gen_bool(0.5));
        let d = if second { E::zero() - bc.clone() } else { nonzero(&mut rng) };
        if !second && (d == bc || d == E::zero() - bc.clone()) {
            continue;
        }
        let hm = [[int(1), b.clone()], [c.clone(), d.clone()]];
        let l = lemma43_gadgets(&Sig::binary(int(1), b.clone(), c.clone(), d.clone())).map_err(|e| e.to_string())?;
        // direct contraction of the gadget definitions
        let contracted = if second {
            let ux = [int(1), E::from_int(-2) * bc.inv().unwrap()];
            let uy = [int(1), E::from_ratio(-1, 9) * bc.inv().unwrap()];
            Sig::from_fn(2, |x| {
                let mut s = E::zero();
                for x3 in 0..2 {
                    for x4 in 0..2 {
                        for x5 in 0..2 {
                            s = s + hm[x[0]][x4].clone()
                                * hm[x4][x3].clone()
                                * ux[x4].clone()
                                * hm[x3][x5].clone()
                                * hm[x5][x[1]].clone()
                                * ux[x5].clone()
                                * uy[x3].clone();
                        }
                    }
                }
                s
            })
            .unwrap()
        } else {
            let ux = [int(1), E::zero() - bc.inv().unwrap()];
            Sig::from_fn(2, |x| {
                (0..2).fold(E::zero(), |s, x3| s + hm[x[0]][x3].clone() * hm[x3][x[1]].clone() * ux[x3].clone())
            })
            .unwrap()
        };
        let closed = if second {
            Sig::binary(int(0), E::from_ratio(-8, 3) * b.clone(), E::from_ratio(-8, 3) * c.clone(), E::from_ratio(80, 9) * bc.clone())
        } else {
            let t = bc.clone() - d.clone();
            Sig::binary(
                int(0),
                t.checked_div(&c).unwrap(),
                t.checked_div(&b).unwrap(),
                (bc.clone() * bc.clone() - d.clone() * d.clone()).checked_div(&bc).unwrap(),
            )
        };
        ensure(contracted == closed && l.signature == closed, || {
            format!("b={b}, c={c}, d={d}: library {:?}, contraction {contracted:?}, closed form {closed:?}", l.signature)
        })?;
        ensure(l.branch == if second { "H''" } else { "H'" }, || format!("wrong branch {}", l.branch))?;
        done[usize::from(second)] += 1;
    }
    Ok("10 parameter choices per branch match contraction and closed form".into())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let or3 = Sig::symmetric_ints(&[0, 1, 1, 1]).unwrap();
    let graphs: Vec<(&str, usize, Vec<(usize, usize)>)> = vec![
        ("K3", 3, vec![(0, 1), (1, 2), (0, 2)]),
        ("P3", 3, vec![(0, 1), (1, 2)]),
        ("C4", 4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]),
    ];
    let mut parts = Vec::new();
    for (fname, family) in [("OR2", vec![Sig::or2()]), ("OR3", vec![or3])] {
        for (gname, n, edges) in &graphs {
            let trace = ReductionTrace::new();
            let r = verify_pipeline(&family, *n, edges, &PipelineConfig::default(), &trace)
                .map_err(|e| format!("{fname} on {gname}: {e}"))?;
            let expected = int(count_vertex_covers(*n, edges));
            ensure(r.recovered == expected && r.expected == expected, || {
                format!("{fname} on {gname}: recovered {}, expected {expected}", r.recovered)
            })?;
            ensure(r.stage_checks > 0 && trace.len() > r.plan.steps.len(), || {
                format!("{fname} on {gname}: stages not verified")
            })?;
            parts.push(format!("{fname}/{gname}={} ({} calls)", r.recovered, r.oracle_calls));
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < PIPELINE_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{}; {:.1} s", parts.join(", "), elapsed.as_secs_f64()))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let pool = [
        int(1),
        int(-1),
        int(2),
        int(-2),
        int(3),
        E::from_ratio(1, 2),
        E::i(),
        E::omega(),
        int(1) + E::i(),
        int(0),
    ];
    let mut done = 0;
    while done < 50 {
        let k = rng.gen_range(1..=2);
        let f = Sig::new(k, (0..1 << k).map(|_| pool.choose(&mut rng).unwrap().clone()).collect()).unwrap();
        if f.is_zero() {
            continue;
        }
        let l = rng.gen_range(1..=3);
        let power = f.tensor_power(l).unwrap();
        let root = power.tensor_root(l).map_err(|e| format!("{f:?}, l = {l}: {e}"))?;
        ensure(root.tensor_power(l).unwrap() == power, || format!("{f:?}, l = {l}: round trip differs"))?;
        done += 1;
    }
    Ok("50 random signatures round-trip exactly".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("tractable evaluators match enumeration", criterion_1),
        ("classifier ground truth", criterion_2),
        ("interpolation recovers #VC", criterion_3),
        ("pinning elimination", criterion_4),
        ("transform invariance", criterion_5),
        ("eigenvalue interpolation", criterion_6),
        ("closed-form gadgets", criterion_7),
        ("end-to-end pipeline", criterion_8),
        ("tensor root round trip", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail}) [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
