//! Evaluation of instances whose constraints are all product type.

use std::collections::BTreeMap;

use crate::classify::{ProductFactor, ProductWitness};
use crate::instance::CspInstance;
use crate::numeric::ExactComplex;

use super::TractError;

/// Union-find where each node stores its parity relative to its parent.
struct ParityUnionFind {
    parent: Vec<usize>,
    parity: Vec<u8>,
    rank: Vec<u8>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        ParityUnionFind {
            parent: (0..n).collect(),
            parity: vec![0; n],
            rank: vec![0; n],
        }
    }

    /// Root of `x` and the parity of `x` relative to it.
    fn find(&mut self, x: usize) -> (usize, u8) {
        let p = self.parent[x];
        if p == x {
            return (x, 0);
        }
        let (root, pp) = self.find(p);
        self.parent[x] = root;
        self.parity[x] ^= pp;
        (root, self.parity[x])
    }

    /// Imposes `x ⊕ y = rel`; returns false on contradiction.
    fn union(&mut self, x: usize, y: usize, rel: u8) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == rel;
        }
        let (child, root) = if self.rank[rx] < self.rank[ry] {
            (rx, ry)
        } else {
            (ry, rx)
        };
        self.parent[child] = root;
        self.parity[child] = px ^ py ^ rel;
        if self.rank[child] == self.rank[root] {
            self.rank[root] += 1;
        }
        true
    }
}

/// Partition function of an instance given a product witness for every
/// constraint's function.
pub fn eval_product(
    inst: &CspInstance<ExactComplex>,
    witnesses: &BTreeMap<String, ProductWitness>,
) -> Result<ExactComplex, TractError> {
    let n = inst.num_vars;
    let mut uf = ParityUnionFind::new(n);
    let mut weight: Vec<[ExactComplex; 2]> = vec![[ExactComplex::one(), ExactComplex::one()]; n];
    let mut scale = ExactComplex::one();
    for c in &inst.constraints {
        let w = witnesses
            .get(&c.func)
            .ok_or_else(|| TractError::MissingWitness(c.func.clone()))?;
        scale = scale * w.scale.clone();
        if scale.is_zero() {
            return Ok(ExactComplex::zero());
        }
        for f in &w.factors {
            match *f {
                ProductFactor::Unary { var, ref values } => {
                    let v = c.vars[var];
                    let [w0, w1] = weight[v].clone();
                    weight[v] = [w0 * values[0].clone(), w1 * values[1].clone()];
                }
                ProductFactor::Pin { var, value } => {
                    let v = c.vars[var];
                    weight[v][1 - value] = ExactComplex::zero();
                }
                ProductFactor::Eq { a, b } | ProductFactor::Neq { a, b } => {
                    let rel = u8::from(matches!(f, ProductFactor::Neq { .. }));
                    if !uf.union(c.vars[a], c.vars[b], rel) {
                        return Ok(ExactComplex::zero());
                    }
                }
            }
        }
    }
    let mut sums: BTreeMap<usize, [ExactComplex; 2]> = BTreeMap::new();
    for v in 0..n {
        let (root, p) = uf.find(v);
        let entry = sums
            .entry(root)
            .or_insert_with(|| [ExactComplex::one(), ExactComplex::one()]);
        for b in 0..2 {
            entry[b] = entry[b].clone() * weight[v][b ^ p as usize].clone();
        }
    }
    Ok(sums
        .into_values()
        .fold(scale, |acc, [s0, s1]| acc * (s0 + s1)))
}
