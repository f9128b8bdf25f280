//! Property tests for value-preserving transformations and exact solvers.

use proptest::prelude::*;

use cspkit::classify::in_p;
use cspkit::instance::{BipartiteGrid, CspInstance, HolantGrid, Side};
use cspkit::numeric::ExactComplex;
use cspkit::reduce::{holographic_transform, kron_apply, kron_solve, thicken, ReductionTrace};
use cspkit::signature::Signature;

type E = ExactComplex;
type Sig = Signature<E>;

fn naive_csp(inst: &CspInstance<E>) -> E {
    (0..1usize << inst.num_vars).fold(E::zero(), |acc, x| {
        acc + inst.constraints.iter().fold(E::one(), |t, c| {
            let bits: Vec<usize> = c.vars.iter().map(|&v| (x >> v) & 1).collect();
            t * inst.functions[&c.func].eval(&bits).clone()
        })
    })
}

fn naive_holant(grid: &HolantGrid<E>) -> E {
    let ports = grid.port_edges();
    (0..1usize << grid.edges.len()).fold(E::zero(), |acc, x| {
        acc + grid.vertices.iter().enumerate().fold(E::one(), |t, (v, s)| {
            let bits: Vec<usize> = ports[v].iter().map(|&e| (x >> e) & 1).collect();
            t * s.eval(&bits).clone()
        })
    })
}

fn small_int() -> impl Strategy<Value = E> {
    (-3i64..=3).prop_map(E::from_int)
}

fn table(k: usize) -> impl Strategy<Value = Sig> {
    prop::collection::vec(small_int(), 1 << k).prop_map(move |v| Sig::new(k, v).unwrap())
}

/// Instance on up to six variables with binary constraints named `B` and
/// unary constraints named `U`.
fn instance() -> impl Strategy<Value = CspInstance<E>> {
    (2usize..=6, table(2), table(1)).prop_flat_map(|(n, b, u)| {
        (
            prop::collection::vec((0..n, 0..n), 1..6),
            prop::collection::vec(0..n, 0..3),
        )
            .prop_map(move |(pairs, singles)| {
                let mut inst = CspInstance::new(n);
                inst.add_function("B", b.clone()).unwrap();
                inst.add_function("U", u.clone()).unwrap();
                for (x, y) in pairs {
                    inst.add_constraint("B", vec![x, y]).unwrap();
                }
                for x in singles {
                    inst.add_constraint("U", vec![x]).unwrap();
                }
                inst
            })
    })
}

fn invertible_2x2() -> impl Strategy<Value = Vec<Vec<E>>> {
    prop::collection::vec(small_int(), 4)
        .prop_filter("singular", |m| !(m[0].clone() * m[3].clone() - m[1].clone() * m[2].clone()).is_zero())
        .prop_map(|m| vec![vec![m[0].clone(), m[1].clone()], vec![m[2].clone(), m[3].clone()]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thickening_raises_entries_to_the_power(inst in instance(), r in 1usize..=3) {
        let out = thicken(&inst, "B", r, &ReductionTrace::new()).unwrap();
        let mut powered = inst.clone();
        let b = &inst.functions["B"];
        let p = Sig::from_fn(2, |x| (0..r).fold(E::one(), |t, _| t * b.eval(x).clone())).unwrap();
        powered.functions.insert("B".into(), p);
        prop_assert_eq!(naive_csp(&out), naive_csp(&powered));
    }

    #[test]
    fn thickening_trace_respects_growth(inst in instance(), r in 1usize..=3) {
        let trace = ReductionTrace::new();
        thicken(&inst, "B", r, &trace).unwrap();
        let occ = inst.occurrences("B");
        for s in trace.steps() {
            prop_assert!(s.after.m <= s.before.m + (r - 1) * occ);
            prop_assert!(s.after.delta <= r * s.before.delta);
        }
    }

    #[test]
    fn kron_solve_inverts_kron_apply(
        factors in prop::collection::vec(invertible_2x2(), 1..=3),
        seed in prop::collection::vec(small_int(), 8),
    ) {
        let b: Vec<E> = seed[..1 << factors.len()].to_vec();
        let x = kron_solve(&factors, &b, 0.0).unwrap();
        prop_assert_eq!(kron_apply(&factors, &x), b);
    }

    #[test]
    fn holographic_transform_preserves_value(
        left in prop::collection::vec(table(2), 1..=3),
        right in prop::collection::vec(table(2), 1..=3),
        t in invertible_2x2(),
        shift in 0usize..6,
    ) {
        // pair left and right binaries on a cycle of length 2·min
        let k = left.len().min(right.len());
        let mut g = BipartiteGrid { grid: HolantGrid::new(), sides: Vec::new() };
        let l: Vec<usize> = left[..k].iter().map(|s| g.add_vertex(s.clone(), Side::Left)).collect();
        let r: Vec<usize> = right[..k].iter().map(|s| g.add_vertex(s.clone(), Side::Right)).collect();
        for i in 0..k {
            g.grid.add_edge((l[i], 0), (r[(i + shift) % k], 0));
            g.grid.add_edge((l[i], 1), (r[(i + shift + 1) % k], 1));
        }
        g.validate().unwrap();
        let tm = [[t[0][0].clone(), t[0][1].clone()], [t[1][0].clone(), t[1][1].clone()]];
        let out = holographic_transform(&g, &tm, &ReductionTrace::new()).unwrap();
        prop_assert_eq!(naive_holant(&out.grid), naive_holant(&g.grid));
    }

    #[test]
    fn product_witness_rebuilds(f in (1usize..=3).prop_flat_map(table)) {
        if let Some(w) = in_p(&f) {
            prop_assert!(w.verify(&f));
            prop_assert_eq!(w.rebuild(), f);
        }
    }

    #[test]
    fn tensor_root_round_trip(f in (1usize..=2).prop_flat_map(table), l in 1usize..=3) {
        prop_assume!(!f.is_zero());
        let p = f.tensor_power(l).unwrap();
        let root = p.tensor_root(l).unwrap();
        prop_assert_eq!(root.tensor_power(l).unwrap(), p);
    }
}
