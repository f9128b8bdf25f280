//! #CSP instances and Holant signature grids.

mod eval;
mod grid;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Field;
use crate::signature::{Signature, SignatureError};

pub use eval::{brute_force, contract, eval_ve, DEFAULT_BRUTE_CAP, DEFAULT_WIDTH_CAP};
pub use grid::{csp_to_holant, eval_holant_brute, holant_to_csp, BipartiteGrid, HolantGrid, Port, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` has arity {arity} but constraint passes {got} variables")]
    ArityMismatch { name: String, arity: usize, got: usize },
    #[error("variable {var} out of range (instance has {n} variables)")]
    VariableOutOfRange { var: usize, n: usize },
    #[error("function `{0}` already defined with a different table")]
    FunctionConflict(String),
    #[error("{what} {got} exceeds cap {cap}")]
    CapExceeded { what: &'static str, got: usize, cap: usize },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(rename = "fn")]
    pub func: String,
    pub vars: Vec<usize>,
}

/// Scale of an instance: variables, constraints and maximum degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub m: usize,
    pub delta: usize,
}

/// A #CSP instance over variables `0..num_vars`.
#[derive(Debug, Clone, PartialEq)]
pub struct CspInstance<S> {
    pub num_vars: usize,
    pub functions: BTreeMap<String, Signature<S>>,
    pub constraints: Vec<Constraint>,
}

impl<S: Field> CspInstance<S> {
    pub fn new(num_vars: usize) -> Self {
        CspInstance {
            num_vars,
            functions: BTreeMap::new(),
            constraints: Vec::new(),
        }
    }

    /// Registers `sig` under `name`; re-registering an equal table is a no-op.
    pub fn add_function(&mut self, name: &str, sig: Signature<S>) -> Result<(), InstanceError> {
        match self.functions.get(name) {
            Some(existing) if *existing != sig => Err(InstanceError::FunctionConflict(name.into())),
            Some(_) => Ok(()),
            None => {
                self.functions.insert(name.to_string(), sig);
                Ok(())
            }
        }
    }

    /// Registers `sig` under `base` or, if that name holds another table,
    /// under the first free `base#k`. Returns the name used.
    pub fn intern_function(&mut self, base: &str, sig: Signature<S>) -> String {
        let mut name = base.to_string();
        let mut k = 1;
        loop {
            match self.functions.get(&name) {
                None => {
                    self.functions.insert(name.clone(), sig);
                    return name;
                }
                Some(existing) if *existing == sig => return name,
                Some(_) => {
                    name = format!("{base}#{k}");
                    k += 1;
                }
            }
        }
    }

    pub fn add_constraint(&mut self, name: &str, vars: Vec<usize>) -> Result<(), InstanceError> {
        self.check_constraint(name, &vars)?;
        self.constraints.push(Constraint {
            func: name.to_string(),
            vars,
        });
        Ok(())
    }

    fn check_constraint(&self, name: &str, vars: &[usize]) -> Result<(), InstanceError> {
        let sig = self
            .functions
            .get(name)
            .ok_or_else(|| InstanceError::UnknownFunction(name.into()))?;
        if sig.arity() != vars.len() {
            return Err(InstanceError::ArityMismatch {
                name: name.into(),
                arity: sig.arity(),
                got: vars.len(),
            });
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= self.num_vars) {
            return Err(InstanceError::VariableOutOfRange {
                var: v,
                n: self.num_vars,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        for c in &self.constraints {
            self.check_constraint(&c.func, &c.vars)?;
        }
        Ok(())
    }

    pub fn fresh_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn signature_of(&self, c: &Constraint) -> &Signature<S> {
        &self.functions[&c.func]
    }

    /// Occurrence count per variable, counting repeats within a constraint.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.num_vars];
        for c in &self.constraints {
            for &v in &c.vars {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn stats(&self) -> Stats {
        Stats {
            n: self.num_vars,
            m: self.constraints.len(),
            delta: self.max_degree(),
        }
    }

    pub fn occurrences(&self, name: &str) -> usize {
        self.constraints.iter().filter(|c| c.func == name).count()
    }

    /// Drops function table entries no constraint refers to.
    pub fn prune_functions(&mut self) {
        let used: std::collections::BTreeSet<&str> =
            self.constraints.iter().map(|c| c.func.as_str()).collect();
        self.functions.retain(|k, _| used.contains(k.as_str()));
    }

    /// Converts every table to another scalar mode.
    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> CspInstance<T> {
        CspInstance {
            num_vars: self.num_vars,
            functions: self
                .functions
                .iter()
                .map(|(k, v)| (k.clone(), v.map(&f)))
                .collect(),
            constraints: self.constraints.clone(),
        }
    }

    /// Graph instance: one variable per vertex, `sig` on every edge.
    pub fn from_graph(
        num_vertices: usize,
        edges: &[(usize, usize)],
        name: &str,
        sig: Signature<S>,
    ) -> Result<Self, InstanceError> {
        let mut inst = CspInstance::new(num_vertices);
        inst.add_function(name, sig)?;
        for &(u, v) in edges {
            inst.add_constraint(name, vec![u, v])?;
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ExactComplex;

    type Sig = Signature<ExactComplex>;

    #[test]
    fn max_degree_counts_multiplicity() {
        let mut inst = CspInstance::<ExactComplex>::new(1);
        inst.add_function("EQ2", Sig::equality(2)).unwrap();
        inst.add_constraint("EQ2", vec![0, 0]).unwrap();
        assert_eq!(inst.max_degree(), 2);
        assert_eq!(CspInstance::<ExactComplex>::new(3).max_degree(), 0);
    }

    #[test]
    fn triangle_degree_is_two() {
        let k3 = CspInstance::from_graph(3, &[(0, 1), (1, 2), (0, 2)], "OR2", Sig::or2()).unwrap();
        assert_eq!(k3.stats(), Stats { n: 3, m: 3, delta: 2 });
    }

    #[test]
    fn constraint_validation() {
        let mut inst = CspInstance::<ExactComplex>::new(2);
        inst.add_function("OR2", Sig::or2()).unwrap();
        assert!(matches!(
            inst.add_constraint("OR2", vec![0]),
            Err(InstanceError::ArityMismatch { .. })
        ));
        assert!(matches!(
            inst.add_constraint("OR2", vec![0, 5]),
            Err(InstanceError::VariableOutOfRange { .. })
        ));
        assert!(matches!(
            inst.add_constraint("AND", vec![0, 1]),
            Err(InstanceError::UnknownFunction(_))
        ));
        assert!(matches!(
            inst.add_function("OR2", Sig::equality(2)),
            Err(InstanceError::FunctionConflict(_))
        ));
    }

    #[test]
    fn interning_avoids_collisions() {
        let mut inst = CspInstance::<ExactComplex>::new(0);
        assert_eq!(inst.intern_function("H", Sig::or2()), "H");
        assert_eq!(inst.intern_function("H", Sig::or2()), "H");
        assert_eq!(inst.intern_function("H", Sig::equality(2)), "H#1");
    }
}
