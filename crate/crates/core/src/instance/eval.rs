//! Partition-function evaluators: exhaustive enumeration and variable
//! elimination.

use std::collections::{BTreeSet, HashMap};

use crate::numeric::Field;
use crate::signature::Signature;

use super::{CspInstance, InstanceError};

/// Default variable cap for exhaustive enumeration.
pub const DEFAULT_BRUTE_CAP: usize = 24;
/// Default cap on intermediate factor width for variable elimination.
pub const DEFAULT_WIDTH_CAP: usize = 22;

/// `Z(I)` by enumerating all `2^n` assignments.
///
/// Assignments are grouped by how many times each distinct nonzero table
/// value occurs in their product, so field multiplications are only spent
/// once per distinct exponent pattern.
pub fn brute_force<S: Field>(inst: &CspInstance<S>, cap: usize) -> Result<S, InstanceError> {
    inst.validate()?;
    if inst.num_vars > cap {
        return Err(InstanceError::CapExceeded {
            what: "variable count",
            got: inst.num_vars,
            cap,
        });
    }
    let mut values: Vec<S> = Vec::new();
    let mut tables: HashMap<&str, Vec<u16>> = HashMap::new();
    for (name, sig) in &inst.functions {
        let ids = sig
            .values()
            .iter()
            .map(|v| {
                if v.is_zero() {
                    return 0u16;
                }
                let pos = match values.iter().position(|u| u == v) {
                    Some(p) => p,
                    None => {
                        values.push(v.clone());
                        values.len() - 1
                    }
                };
                (pos + 1) as u16
            })
            .collect();
        tables.insert(name.as_str(), ids);
    }

    let degrees = inst.degrees();
    let used: Vec<usize> = (0..inst.num_vars).filter(|&v| degrees[v] > 0).collect();
    let free_count = inst.num_vars - used.len();
    let mut position = vec![0usize; inst.num_vars];
    for (i, &v) in used.iter().enumerate() {
        position[v] = i;
    }
    let width = used.len();
    let shifts: Vec<(&[u16], Vec<usize>)> = inst
        .constraints
        .iter()
        .map(|c| {
            let shifts = c.vars.iter().map(|&v| width - 1 - position[v]).collect();
            (tables[c.func.as_str()].as_slice(), shifts)
        })
        .collect();

    let r = values.len();
    let mut histogram: HashMap<Vec<u16>, u64> = HashMap::new();
    let mut exps = vec![0u16; r];
    'assign: for a in 0..(1u64 << width) {
        exps.iter_mut().for_each(|e| *e = 0);
        for (table, sh) in &shifts {
            let idx = sh
                .iter()
                .fold(0usize, |acc, &s| (acc << 1) | ((a >> s) & 1) as usize);
            let id = table[idx];
            if id == 0 {
                continue 'assign;
            }
            exps[id as usize - 1] += 1;
        }
        match histogram.get_mut(exps.as_slice()) {
            Some(count) => *count += 1,
            None => {
                histogram.insert(exps.clone(), 1);
            }
        }
    }

    let mut keys: Vec<_> = histogram.into_iter().collect();
    keys.sort();
    let mut total = S::zero();
    for (e, count) in keys {
        let mut term = int_scalar::<S>(count);
        for (v, &k) in values.iter().zip(&e) {
            if k > 0 {
                term = term * v.pow(k as u64);
            }
        }
        total = total + term;
    }
    Ok(total * S::from_int(2).pow(free_count as u64))
}

fn int_scalar<S: Field>(v: u64) -> S {
    if v <= i64::MAX as u64 {
        S::from_int(v as i64)
    } else {
        S::from_int((v >> 1) as i64) * S::from_int(2) + S::from_int((v & 1) as i64)
    }
}

/// A factor over a sorted set of distinct variables; the first variable
/// is the most significant index bit.
#[derive(Clone)]
struct Factor<S> {
    vars: Vec<usize>,
    table: Vec<S>,
}

impl<S: Field> Factor<S> {
    fn from_constraint(vars: &[usize], sig: &Signature<S>) -> Self {
        let mut uniq: Vec<usize> = vars.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let k = uniq.len();
        let pos: Vec<usize> = vars
            .iter()
            .map(|v| uniq.binary_search(v).unwrap())
            .collect();
        let table = (0..1usize << k)
            .map(|a| {
                let idx = pos
                    .iter()
                    .fold(0usize, |acc, &p| (acc << 1) | ((a >> (k - 1 - p)) & 1));
                sig.value(idx).clone()
            })
            .collect();
        Factor { vars: uniq, table }
    }

    fn product(factors: &[Factor<S>], cap: usize) -> Result<Self, InstanceError> {
        let mut vars: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
        vars.sort_unstable();
        vars.dedup();
        if vars.len() > cap {
            return Err(InstanceError::CapExceeded {
                what: "elimination width",
                got: vars.len(),
                cap,
            });
        }
        let k = vars.len();
        let layouts: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| {
                f.vars
                    .iter()
                    .map(|v| k - 1 - vars.binary_search(v).unwrap())
                    .collect()
            })
            .collect();
        let table = (0..1usize << k)
            .map(|a| {
                let mut acc = S::one();
                for (f, shifts) in factors.iter().zip(&layouts) {
                    let idx = shifts
                        .iter()
                        .fold(0usize, |i, &s| (i << 1) | ((a >> s) & 1));
                    let v = &f.table[idx];
                    if v.is_zero() {
                        return S::zero();
                    }
                    acc = acc * v.clone();
                }
                acc
            })
            .collect();
        Ok(Factor { vars, table })
    }

    fn sum_out(&self, v: usize) -> Self {
        let j = self.vars.iter().position(|&u| u == v).unwrap();
        let sig = Signature::new(self.vars.len(), self.table.clone()).expect("factor width within cap");
        let summed = sig.project(j).expect("index in range");
        let mut vars = self.vars.clone();
        vars.remove(j);
        Factor {
            vars,
            table: summed.into_values(),
        }
    }
}

/// Sums out every variable not in `free` and returns the resulting
/// signature on `free` (in the given order; entries must be distinct).
pub fn contract<S: Field>(
    inst: &CspInstance<S>,
    free: &[usize],
    width_cap: usize,
) -> Result<Signature<S>, InstanceError> {
    inst.validate()?;
    let factors: Vec<Factor<S>> = inst
        .constraints
        .iter()
        .map(|c| Factor::from_constraint(&c.vars, inst.signature_of(c)))
        .collect();
    let mut is_free = vec![false; inst.num_vars];
    for &v in free {
        if v >= inst.num_vars {
            return Err(InstanceError::VariableOutOfRange {
                var: v,
                n: inst.num_vars,
            });
        }
        is_free[v] = true;
    }
    let mut touched = vec![false; inst.num_vars];
    for f in &factors {
        for &v in &f.vars {
            touched[v] = true;
        }
    }
    let isolated = (0..inst.num_vars)
        .filter(|&v| !touched[v] && !is_free[v])
        .count();

    // slots of live factors and, per variable, the slots mentioning it
    let mut slots: Vec<Option<Factor<S>>> = factors.into_iter().map(Some).collect();
    let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); inst.num_vars];
    for (i, f) in slots.iter().enumerate() {
        for &v in &f.as_ref().unwrap().vars {
            adjacent[v].push(i);
        }
    }
    let width_of = |v: usize, slots: &[Option<Factor<S>>], adjacent: &[Vec<usize>]| {
        let mut scope: Vec<usize> = adjacent[v]
            .iter()
            .flat_map(|&i| slots[i].as_ref().unwrap().vars.iter().copied())
            .collect();
        scope.sort_unstable();
        scope.dedup();
        scope.len()
    };
    // greedy min-width order, lowest index on ties
    let mut width = vec![0usize; inst.num_vars];
    let mut queue = BTreeSet::new();
    for v in (0..inst.num_vars).filter(|&v| touched[v] && !is_free[v]) {
        width[v] = width_of(v, &slots, &adjacent);
        queue.insert((width[v], v));
    }
    while let Some((_, v)) = queue.pop_first() {
        let ids = std::mem::take(&mut adjacent[v]);
        let with: Vec<Factor<S>> = ids.iter().map(|&i| slots[i].take().unwrap()).collect();
        for f in &with {
            for &u in &f.vars {
                if u != v {
                    adjacent[u].retain(|i| !ids.contains(i));
                }
            }
        }
        let merged = Factor::product(&with, width_cap)?.sum_out(v);
        let id = slots.len();
        for &u in &merged.vars {
            adjacent[u].push(id);
        }
        slots.push(Some(merged));
        let changed: Vec<usize> = slots[id].as_ref().unwrap().vars.clone();
        for u in changed {
            if !is_free[u] && queue.remove(&(width[u], u)) {
                width[u] = width_of(u, &slots, &adjacent);
                queue.insert((width[u], u));
            }
        }
    }
    let factors: Vec<Factor<S>> = slots.into_iter().flatten().collect();

    let mut result = Factor::product(&factors, width_cap)?;
    // free variables absent from every factor are unconstrained
    for &v in free {
        if !result.vars.contains(&v) {
            let ones = Factor {
                vars: vec![v],
                table: vec![S::one(), S::one()],
            };
            result = Factor::product(&[result, ones], width_cap)?;
        }
    }
    let k = free.len();
    let shifts: Vec<usize> = result
        .vars
        .iter()
        .map(|v| k - 1 - free.iter().position(|u| u == v).unwrap())
        .collect();
    let scale = S::from_int(2).pow(isolated as u64);
    let sig = Signature::from_fn(k, |bits| {
        let a = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b);
        let idx = shifts
            .iter()
            .fold(0usize, |i, &s| (i << 1) | ((a >> s) & 1));
        result.table[idx].clone() * scale.clone()
    })?;
    Ok(sig)
}

/// `Z(I)` by variable elimination.
pub fn eval_ve<S: Field>(inst: &CspInstance<S>, width_cap: usize) -> Result<S, InstanceError> {
    Ok(contract(inst, &[], width_cap)?.value(0).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ApproxComplex, ExactComplex};

    type Sig = Signature<ExactComplex>;

    fn k3() -> CspInstance<ExactComplex> {
        CspInstance::from_graph(3, &[(0, 1), (1, 2), (0, 2)], "OR2", Sig::or2()).unwrap()
    }

    #[test]
    fn triangle_vertex_covers() {
        // covers of K3: the three 2-subsets and the full set
        assert_eq!(brute_force(&k3(), 24).unwrap(), ExactComplex::from_int(4));
        assert_eq!(eval_ve(&k3(), 22).unwrap(), ExactComplex::from_int(4));
    }

    #[test]
    fn single_equality() {
        let mut inst = CspInstance::new(2);
        inst.add_function("EQ2", Sig::equality(2)).unwrap();
        inst.add_constraint("EQ2", vec![0, 1]).unwrap();
        assert_eq!(brute_force(&inst, 24).unwrap(), ExactComplex::from_int(2));
    }

    #[test]
    fn empty_instance_counts_all_assignments() {
        let inst = CspInstance::<ExactComplex>::new(5);
        assert_eq!(brute_force(&inst, 24).unwrap(), ExactComplex::from_int(32));
        assert_eq!(eval_ve(&inst, 22).unwrap(), ExactComplex::from_int(32));
    }

    #[test]
    fn cap_is_enforced() {
        let inst = CspInstance::<ExactComplex>::new(30);
        assert!(matches!(
            brute_force(&inst, 24),
            Err(InstanceError::CapExceeded { .. })
        ));
    }

    #[test]
    fn repeated_variable_uses_diagonal() {
        let mut inst = CspInstance::new(1);
        let h = Sig::from_ints(2, &[1, 5, 7, 9]).unwrap();
        inst.add_function("H", h).unwrap();
        inst.add_constraint("H", vec![0, 0]).unwrap();
        assert_eq!(brute_force(&inst, 24).unwrap(), ExactComplex::from_int(10));
        assert_eq!(eval_ve(&inst, 22).unwrap(), ExactComplex::from_int(10));
    }

    #[test]
    fn contraction_of_chain_is_matrix_product() {
        let a = Sig::from_ints(2, &[1, 2, 3, 4]).unwrap();
        let b = Sig::from_ints(2, &[0, 1, -1, 5]).unwrap();
        let mut inst = CspInstance::new(3);
        inst.add_function("A", a.clone()).unwrap();
        inst.add_function("B", b.clone()).unwrap();
        inst.add_constraint("A", vec![0, 1]).unwrap();
        inst.add_constraint("B", vec![1, 2]).unwrap();
        assert_eq!(contract(&inst, &[0, 2], 22).unwrap(), a.matmul(&b).unwrap());
        // reversed free order transposes
        assert_eq!(
            contract(&inst, &[2, 0], 22).unwrap(),
            a.matmul(&b).unwrap().transpose().unwrap()
        );
    }

    #[test]
    fn approx_mode_agrees() {
        let inst = k3().map(|v| ApproxComplex::from(v.to_complex()));
        let z = brute_force(&inst, 24).unwrap();
        assert!((z.re() - 4.0).abs() < 1e-12);
    }
}
