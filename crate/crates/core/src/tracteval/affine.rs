//! Evaluation of instances whose constraints are all affine type.
//!
//! The affine supports are conjoined into one GF(2) system, the summed
//! exponent is rewritten over the free variables, and the resulting sum
//! `Σ_y i^{Q(y)}` is evaluated one variable at a time.

use std::collections::BTreeMap;

use crate::classify::AWitness;
use crate::instance::CspInstance;
use crate::numeric::ExactComplex;

use super::TractError;

/// `c + Σ lin_u y_u + Σ_{u<v} 2 cross_{uv} y_u y_v (mod 4)` over variables
/// that are still alive.
#[derive(Debug, Clone)]
pub(crate) struct Quad {
    c: u8,
    lin: Vec<u8>,
    cross: Vec<Vec<bool>>,
    alive: Vec<bool>,
}

impl Quad {
    pub(crate) fn new(m: usize) -> Self {
        Quad {
            c: 0,
            lin: vec![0; m],
            cross: vec![vec![false; m]; m],
            alive: vec![true; m],
        }
    }

    pub(crate) fn add_const(&mut self, k: u8) {
        self.c = (self.c + k) % 4;
    }

    pub(crate) fn add_lin(&mut self, u: usize, k: u8) {
        self.lin[u] = (self.lin[u] + k) % 4;
    }

    /// Adds `2 y_u y_v`; when `u = v` this is `2 y_u`.
    pub(crate) fn add_cross2(&mut self, u: usize, v: usize) {
        if u == v {
            self.add_lin(u, 2);
        } else {
            self.cross[u][v] ^= true;
            self.cross[v][u] ^= true;
        }
    }

    fn partners(&self, u: usize) -> Vec<usize> {
        (0..self.lin.len())
            .filter(|&v| self.alive[v] && self.cross[u][v])
            .collect()
    }

    /// Adds `a · (c0 ⊕ ⊕_{u∈s} y_u)` using `w mod 2 ≡ e1 + 2 e2 (mod 4)`.
    fn add_scaled_parity(&mut self, a: u8, c0: u8, s: &[usize]) {
        let a = a % 4;
        self.add_const(a * c0);
        for &u in s {
            self.add_lin(u, a);
        }
        if a % 2 == 1 {
            for (i, &u) in s.iter().enumerate() {
                for &v in &s[i + 1..] {
                    self.add_cross2(u, v);
                }
                if c0 == 1 {
                    self.add_lin(u, 2);
                }
            }
        }
    }

    /// Adds `2 · (c0 ⊕ ⊕_{u∈s} y_u) · y_v`.
    fn add_parity_times_var(&mut self, c0: u8, s: &[usize], v: usize) {
        if c0 == 1 {
            self.add_lin(v, 2);
        }
        for &u in s {
            self.add_cross2(u, v);
        }
    }

    fn remove(&mut self, w: usize) -> (u8, Vec<usize>) {
        let a = self.lin[w];
        let p = self.partners(w);
        self.lin[w] = 0;
        for &v in &p {
            self.cross[w][v] = false;
            self.cross[v][w] = false;
        }
        self.alive[w] = false;
        (a, p)
    }

    /// Replaces `y_w` by `c0 ⊕ ⊕_{u∈s} y_u` (`w ∉ s`).
    pub(crate) fn substitute(&mut self, w: usize, c0: u8, s: &[usize]) {
        let (a, p) = self.remove(w);
        self.add_scaled_parity(a, c0, s);
        for v in p {
            self.add_parity_times_var(c0, s, v);
        }
    }

    /// Value of the exponent at an assignment of the alive variables.
    #[cfg(test)]
    pub(crate) fn eval(&self, y: &[u8]) -> u8 {
        let m = self.lin.len();
        let mut e = self.c as u32;
        for u in (0..m).filter(|&u| self.alive[u]) {
            e += (self.lin[u] * y[u]) as u32;
            for v in u + 1..m {
                if self.alive[v] && self.cross[u][v] {
                    e += 2 * (y[u] * y[v]) as u32;
                }
            }
        }
        (e % 4) as u8
    }
}

/// `Σ_y i^{Q(y)}` over the alive variables, as `√2^s · ω^t` or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GaussSum {
    Zero,
    Value { sqrt2_power: u32, omega_power: u8 },
}

impl GaussSum {
    pub(crate) fn to_exact(self) -> ExactComplex {
        match self {
            GaussSum::Zero => ExactComplex::zero(),
            GaussSum::Value {
                sqrt2_power,
                omega_power,
            } => ExactComplex::sqrt2().pow(sqrt2_power as u64) * ExactComplex::omega_pow(omega_power as i64),
        }
    }
}

pub(crate) fn gauss_sum(mut q: Quad) -> GaussSum {
    let mut s = 0u32;
    let mut t = 0u8;
    for u in 0..q.lin.len() {
        if !q.alive[u] {
            continue;
        }
        let (a, l) = q.remove(u);
        match a {
            // 1 + (−1)^{L + a/2}: either 2 on the hyperplane L = a/2, or 0
            0 | 2 => {
                s += 2;
                match l.split_first() {
                    None if a == 2 => return GaussSum::Zero,
                    None => {}
                    Some((&w, rest)) => q.substitute(w, a / 2, rest),
                }
            }
            // 1 + i^{1+2L} = (1+i) · i^{3L}
            1 => {
                s += 1;
                t = (t + 1) % 8;
                q.add_scaled_parity(3, 0, &l);
            }
            // 1 + i^{3+2L} = (1−i) · i^{L}
            _ => {
                s += 1;
                t = (t + 7) % 8;
                q.add_scaled_parity(1, 0, &l);
            }
        }
    }
    GaussSum::Value {
        sqrt2_power: s,
        omega_power: (t + 2 * q.c) % 8,
    }
}

/// Reduced row echelon form over GF(2). Each row is a bitset over the `n`
/// variables plus a right-hand side. Returns `None` when inconsistent,
/// otherwise `(pivot, rhs, other variables)` per independent row.
fn solve_gf2(rows: Vec<(Vec<u64>, bool)>, n: usize) -> Option<Vec<(usize, u8, Vec<usize>)>> {
    let get = |r: &[u64], j: usize| (r[j / 64] >> (j % 64)) & 1 == 1;
    let mut rows = rows;
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(found) = (rank..rows.len()).find(|&i| get(&rows[i].0, col)) else {
            continue;
        };
        rows.swap(rank, found);
        let (prow, prhs) = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && get(&row.0, col) {
                for (x, y) in row.0.iter_mut().zip(&prow) {
                    *x ^= y;
                }
                row.1 ^= prhs;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|(_, rhs)| *rhs) {
        return None;
    }
    Some(
        pivots
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let (row, rhs) = &rows[i];
                let others = (0..n).filter(|&j| j != p && get(row, j)).collect();
                (p, u8::from(*rhs), others)
            })
            .collect(),
    )
}

/// Partition function of an instance given an affine witness for every
/// constraint's function.
pub fn eval_affine(
    inst: &CspInstance<ExactComplex>,
    witnesses: &BTreeMap<String, AWitness>,
) -> Result<ExactComplex, TractError> {
    let n = inst.num_vars;
    let words = n.div_ceil(64).max(1);
    let mut quad = Quad::new(n);
    let mut rows: Vec<(Vec<u64>, bool)> = Vec::new();
    let mut scale = ExactComplex::one();
    for c in &inst.constraints {
        let w = witnesses
            .get(&c.func)
            .ok_or_else(|| TractError::MissingWitness(c.func.clone()))?;
        let Some(base) = w.support.base else {
            return Ok(ExactComplex::zero());
        };
        scale = scale * w.scale.clone();
        let k = w.support.arity;
        let bit = |x: usize, q: usize| (x >> (k - 1 - q)) & 1 == 1;
        for q in (0..k).filter(|q| !w.support.pivots.contains(q)) {
            let mut row = vec![0u64; words];
            let mut toggle = |v: usize| row[v / 64] ^= 1 << (v % 64);
            toggle(c.vars[q]);
            for (b, &p) in w.support.basis.iter().zip(&w.support.pivots) {
                if bit(*b, q) {
                    toggle(c.vars[p]);
                }
            }
            rows.push((row, bit(base, q)));
        }
        let var = |j: usize| c.vars[w.poly.vars[j]];
        quad.add_const(w.poly.constant);
        for (j, &a) in w.poly.linear.iter().enumerate() {
            quad.add_lin(var(j), a);
        }
        for &(j, l) in &w.poly.cross {
            quad.add_cross2(var(j), var(l));
        }
    }
    let Some(solution) = solve_gf2(rows, n) else {
        return Ok(ExactComplex::zero());
    };
    for (p, rhs, others) in solution {
        quad.substitute(p, rhs, &others);
    }
    Ok(scale * gauss_sum(quad).to_exact())
}
