//! Holographic transformations and equality-tree rewriting of bipartite
//! signature grids.

use serde_json::json;

use crate::instance::{BipartiteGrid, Port, Side};
use crate::numeric::Field;
use crate::signature::Signature;

use super::gadgets::sig_matches;
use super::trace::{ReductionTrace, TraceStep};
use super::ReduceError;

pub type Mat2<S> = [[S; 2]; 2];

fn inverse2<S: Field>(t: &Mat2<S>) -> Result<Mat2<S>, ReduceError> {
    let [[a, b], [c, d]] = t.clone();
    let det = a.clone() * d.clone() - b.clone() * c.clone();
    let inv = det
        .inv()
        .ok_or_else(|| ReduceError::Singular("transformation matrix".into()))?;
    let neg = |x: S| S::zero() - x;
    Ok([
        [d * inv.clone(), neg(b) * inv.clone()],
        [neg(c) * inv.clone(), a * inv],
    ])
}

/// Left signatures become `F·(T⁻¹)^{⊗k}`, right ones `T^{⊗k}·H`; the
/// Holant value is unchanged.
pub fn holographic_transform<S: Field>(
    grid: &BipartiteGrid<S>,
    t: &Mat2<S>,
    trace: &ReductionTrace,
) -> Result<BipartiteGrid<S>, ReduceError> {
    grid.validate()?;
    let tinv = inverse2(t)?;
    let mut out = grid.clone();
    for (sig, side) in out.grid.vertices.iter_mut().zip(&grid.sides) {
        *sig = match side {
            Side::Left => sig.transform(&tinv, true),
            Side::Right => sig.transform(t, false),
        };
    }
    trace.record(TraceStep::new(
        "holographic_transform",
        grid.stats(),
        out.stats(),
        0,
        S::one().to_scalar(),
    ));
    Ok(out)
}

fn left_equality_arity<S: Field>(sig: &Signature<S>) -> Option<usize> {
    let k = sig.arity();
    (k >= 1 && sig_matches(sig, &Signature::equality(k))).then_some(k)
}

/// Transforms by `M = (1/√2)[[1,1],[1,−1]]` (orthogonal, `M⁻¹ = M`) a grid
/// whose left side uses only `=₁, =₂, =₃`. `=₂` is fixed, `=₃` becomes
/// `(1/√2)[1,0,1,0]`, and each `=₁` becomes `√2·δ₀`; the `√2` factors are
/// moved to the returned ledger: `Z(grid) = ledger · Z(result)`.
pub fn local_transform_m<S: Field>(
    grid: &BipartiteGrid<S>,
    trace: &ReductionTrace,
) -> Result<(BipartiteGrid<S>, S), ReduceError> {
    grid.validate()?;
    for v in grid.vertices_on(Side::Left) {
        match left_equality_arity(&grid.grid.vertices[v]) {
            Some(1..=3) => {}
            _ => {
                return Err(ReduceError::Precondition(format!(
                    "left vertex {v} is not one of =1, =2, =3"
                )))
            }
        }
    }
    let h = S::sqrt2().inv().expect("nonzero");
    let m = [[h.clone(), h.clone()], [h.clone(), S::zero() - h]];
    let mut out = holographic_transform(grid, &m, &ReductionTrace::new())?;
    let mut ones = 0u64;
    for v in out.vertices_on(Side::Left) {
        if out.grid.vertices[v].arity() == 1 {
            out.grid.vertices[v] = Signature::pin_unary(0);
            ones += 1;
        }
    }
    let ledger = S::sqrt2().pow(ones);
    trace.record(
        TraceStep::new("local_transform_M", grid.stats(), out.stats(), 0, ledger.to_scalar())
            .with_detail(json!({ "unary_equalities": ones })),
    );
    Ok((out, ledger))
}

enum Attach {
    /// The far end of an original edge.
    External(Port),
    /// A free port of a new `=₃` node.
    Internal(Port),
}

struct TreeBuilder<'a, S> {
    grid: &'a mut BipartiteGrid<S>,
    added_vertices: usize,
    added_edges: usize,
}

impl<S: Field> TreeBuilder<'_, S> {
    fn connect(&mut self, port: Port, to: Attach) {
        match to {
            Attach::External(p) => self.grid.grid.add_edge(port, p),
            Attach::Internal(p) => {
                let mid = self.grid.add_vertex(Signature::equality(2), Side::Right);
                self.grid.grid.add_edge(port, (mid, 0));
                self.grid.grid.add_edge((mid, 1), p);
                self.added_vertices += 1;
                self.added_edges += 2;
            }
        }
    }

    /// Binary tree of `=₃` nodes over `ends`; returns its open attachment.
    fn subtree(&mut self, mut ends: Vec<Port>) -> Attach {
        if ends.len() == 1 {
            return Attach::External(ends[0]);
        }
        let right = ends.split_off(ends.len() / 2);
        let a = self.subtree(ends);
        let b = self.subtree(right);
        let node = self.grid.add_vertex(Signature::equality(3), Side::Left);
        self.added_vertices += 1;
        self.connect((node, 0), a);
        self.connect((node, 1), b);
        Attach::Internal((node, 2))
    }
}

/// Replaces every left `=_k` with `k > 3` by a balanced tree of `=₃` nodes,
/// inserting right-side `=₂` vertices on tree-internal edges to keep the
/// grid bipartite. Per rewritten `=_k` the growth is checked against
/// `(k−1)+2(k−1)` vertices and `2(k−1)` edges.
pub fn equality_tree_rewrite<S: Field>(
    grid: &BipartiteGrid<S>,
    trace: &ReductionTrace,
) -> Result<BipartiteGrid<S>, ReduceError> {
    grid.validate()?;
    let mut rewrite = Vec::new();
    for v in grid.vertices_on(Side::Left) {
        match left_equality_arity(&grid.grid.vertices[v]) {
            Some(k) if k > 3 => rewrite.push(v),
            Some(_) => {}
            None => {
                return Err(ReduceError::Precondition(format!(
                    "left vertex {v} is not an equality"
                )))
            }
        }
    }
    let port_edges = grid.grid.port_edges();
    let mut out = grid.clone();
    let mut drop = vec![false; grid.grid.edges.len()];
    let mut far: Vec<Vec<Port>> = Vec::new();
    for &v in &rewrite {
        let ends: Vec<Port> = port_edges[v]
            .iter()
            .map(|&e| {
                drop[e] = true;
                let [a, b] = grid.grid.edges[e];
                if a.0 == v {
                    b
                } else {
                    a
                }
            })
            .collect();
        far.push(ends);
    }
    out.grid.edges = grid
        .grid
        .edges
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(e, _)| *e)
        .collect();
    let mut sizes = Vec::new();
    for (&v, ends) in rewrite.iter().zip(far) {
        let k = ends.len();
        out.grid.vertices[v] = Signature::equality(3);
        let mut b = TreeBuilder {
            grid: &mut out,
            added_vertices: 0,
            added_edges: 0,
        };
        // root with three groups of near-equal size
        let mut rest = ends;
        let third = rest.len() / 3;
        let g3 = rest.split_off(rest.len() - third);
        let g2 = rest.split_off(rest.len() - rest.len() / 2);
        for (port, group) in [rest, g2, g3].into_iter().enumerate() {
            let a = b.subtree(group);
            b.connect((v, port), a);
        }
        let (nv, ne) = (b.added_vertices + 1, b.added_edges);
        if nv > 3 * (k - 1) || ne > 2 * (k - 1) {
            return Err(ReduceError::verification(
                "equality_tree_rewrite",
                format!("=_{k} tree uses {nv} vertices and {ne} new edges"),
            ));
        }
        sizes.push(json!({ "arity": k, "vertices": nv, "new_edges": ne }));
    }
    out.validate()?;
    if out
        .vertices_on(Side::Left)
        .iter()
        .any(|&v| out.grid.vertices[v].arity() > 3)
    {
        return Err(ReduceError::verification("equality_tree_rewrite", "equality of arity > 3 remains"));
    }
    trace.record(
        TraceStep::new("equality_tree_rewrite", grid.stats(), out.stats(), 0, S::one().to_scalar())
            .with_detail(json!({ "rewritten": sizes })),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{eval_holant_brute, HolantGrid};
    use crate::numeric::ExactComplex;

    type E = ExactComplex;
    type Sig = Signature<E>;

    /// One left `=_k` joined to `k` distinct right unaries.
    fn star(k: usize) -> BipartiteGrid<E> {
        let mut g = BipartiteGrid {
            grid: HolantGrid::new(),
            sides: Vec::new(),
        };
        let c = g.add_vertex(Sig::equality(k), Side::Left);
        for j in 0..k {
            let u = g.add_vertex(Sig::from_ints(1, &[1, j as i64 + 2]).unwrap(), Side::Right);
            g.grid.add_edge((c, j), (u, 0));
        }
        g
    }

    #[test]
    fn identity_transform_is_noop() {
        let g = star(3);
        let id = [[E::one(), E::zero()], [E::zero(), E::one()]];
        assert_eq!(holographic_transform(&g, &id, &ReductionTrace::new()).unwrap(), g);
    }

    #[test]
    fn orthogonal_fixes_eq2() {
        let mut g = star(2);
        g.grid.vertices[0] = Sig::equality(2);
        let (c, s) = (E::from_ratio(3, 5), E::from_ratio(4, 5));
        let t = [[c.clone(), s.clone()], [E::zero() - s, c]];
        let out = holographic_transform(&g, &t, &ReductionTrace::new()).unwrap();
        assert_eq!(out.grid.vertices[0], Sig::equality(2));
        assert_eq!(
            eval_holant_brute(&out.grid, 24).unwrap(),
            eval_holant_brute(&g.grid, 24).unwrap()
        );
    }

    #[test]
    fn singular_transform_rejected() {
        let t = [[E::one(), E::one()], [E::one(), E::one()]];
        assert!(holographic_transform(&star(2), &t, &ReductionTrace::new()).is_err());
    }

    #[test]
    fn m_maps_unary_equality_to_scaled_pin() {
        let mut g = star(1);
        g.grid.vertices[1] = Sig::from_ints(1, &[2, 7]).unwrap();
        let (out, ledger) = local_transform_m(&g, &ReductionTrace::new()).unwrap();
        assert_eq!(out.grid.vertices[0], Sig::pin_unary(0));
        assert_eq!(ledger, E::sqrt2());
        assert_eq!(
            eval_holant_brute(&out.grid, 24).unwrap() * ledger,
            eval_holant_brute(&g.grid, 24).unwrap()
        );
        let eq3 = Sig::equality(3).transform(
            &[[E::sqrt2().inv().unwrap(), E::sqrt2().inv().unwrap()],
              [E::sqrt2().inv().unwrap(), E::zero() - E::sqrt2().inv().unwrap()]],
            true,
        );
        let h = E::sqrt2().inv().unwrap();
        assert_eq!(eq3, Sig::symmetric(vec![h.clone(), E::zero(), h, E::zero()]).unwrap());
    }

    #[test]
    fn eq4_tree_bounds() {
        let g = star(4);
        let t = ReductionTrace::new();
        let out = equality_tree_rewrite(&g, &t).unwrap();
        assert_eq!(
            eval_holant_brute(&out.grid, 24).unwrap(),
            eval_holant_brute(&g.grid, 24).unwrap()
        );
        let detail = t.steps()[0].detail.clone().unwrap();
        assert_eq!(detail["rewritten"][0]["vertices"], 3);
        assert!(detail["rewritten"][0]["new_edges"].as_u64().unwrap() <= 6);
    }

    #[test]
    fn eq3_unchanged() {
        let g = star(3);
        assert_eq!(equality_tree_rewrite(&g, &ReductionTrace::new()).unwrap(), g);
    }

    #[test]
    fn larger_equalities_preserve_value() {
        for k in 4..=8 {
            let g = star(k);
            let out = equality_tree_rewrite(&g, &ReductionTrace::new()).unwrap();
            assert_eq!(
                eval_holant_brute(&out.grid, 24).unwrap(),
                eval_holant_brute(&g.grid, 24).unwrap()
            );
        }
    }
}
