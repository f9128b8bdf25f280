//! Holant signature grids and their conversion to and from #CSP.

use serde::{Deserialize, Serialize};

use crate::numeric::Field;
use crate::signature::Signature;

use super::{brute_force, CspInstance, InstanceError, Stats};

/// A vertex port: (vertex index, input position).
pub type Port = (usize, usize);

/// A graph whose vertices carry signatures; input `p` of vertex `v` is the
/// variable of the unique edge incident to port `(v, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolantGrid<S> {
    pub vertices: Vec<Signature<S>>,
    pub edges: Vec<[Port; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A grid with a two-colouring; every edge joins a left and a right vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGrid<S> {
    pub grid: HolantGrid<S>,
    pub sides: Vec<Side>,
}

impl<S: Field> HolantGrid<S> {
    pub fn new() -> Self {
        HolantGrid {
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn add_vertex(&mut self, sig: Signature<S>) -> usize {
        self.vertices.push(sig);
        self.vertices.len() - 1
    }

    pub fn add_edge(&mut self, a: Port, b: Port) {
        self.edges.push([a, b]);
    }

    /// Checks that every port is used by exactly one edge.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let mut used: Vec<Vec<bool>> = self
            .vertices
            .iter()
            .map(|s| vec![false; s.arity()])
            .collect();
        for (e, ends) in self.edges.iter().enumerate() {
            for &(v, p) in ends {
                let slot = used
                    .get_mut(v)
                    .and_then(|ports| ports.get_mut(p))
                    .ok_or_else(|| {
                        InstanceError::BadGrid(format!("edge {e} uses missing port ({v},{p})"))
                    })?;
                if *slot {
                    return Err(InstanceError::BadGrid(format!(
                        "port ({v},{p}) used twice"
                    )));
                }
                *slot = true;
            }
        }
        for (v, ports) in used.iter().enumerate() {
            if let Some(p) = ports.iter().position(|u| !u) {
                return Err(InstanceError::BadGrid(format!("port ({v},{p}) is dangling")));
            }
        }
        Ok(())
    }

    /// For each vertex, the edge attached to each of its ports.
    pub fn port_edges(&self) -> Vec<Vec<usize>> {
        let mut map: Vec<Vec<usize>> = self
            .vertices
            .iter()
            .map(|s| vec![usize::MAX; s.arity()])
            .collect();
        for (e, ends) in self.edges.iter().enumerate() {
            for &(v, p) in ends {
                map[v][p] = e;
            }
        }
        map
    }
}

impl<S: Field> Default for HolantGrid<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Field> BipartiteGrid<S> {
    pub fn validate(&self) -> Result<(), InstanceError> {
        self.grid.validate()?;
        if self.sides.len() != self.grid.vertices.len() {
            return Err(InstanceError::BadGrid("side list length mismatch".into()));
        }
        for (e, [(u, _), (v, _)]) in self.grid.edges.iter().enumerate() {
            if self.sides[*u] == self.sides[*v] {
                return Err(InstanceError::BadGrid(format!(
                    "edge {e} does not cross sides"
                )));
            }
        }
        Ok(())
    }

    pub fn add_vertex(&mut self, sig: Signature<S>, side: Side) -> usize {
        self.sides.push(side);
        self.grid.add_vertex(sig)
    }

    pub fn vertices_on(&self, side: Side) -> Vec<usize> {
        (0..self.sides.len())
            .filter(|&v| self.sides[v] == side)
            .collect()
    }

    /// Left vertices, right vertices, and maximum left arity.
    pub fn stats(&self) -> Stats {
        let left = self.vertices_on(Side::Left);
        Stats {
            n: left.len(),
            m: self.sides.len() - left.len(),
            delta: left
                .iter()
                .map(|&v| self.grid.vertices[v].arity())
                .max()
                .unwrap_or(0),
        }
    }
}

/// Edges become variables and vertices become constraints named `v<i>`.
pub fn holant_to_csp<S: Field>(grid: &HolantGrid<S>) -> Result<CspInstance<S>, InstanceError> {
    grid.validate()?;
    let mut inst = CspInstance::new(grid.edges.len());
    for (v, ports) in grid.port_edges().into_iter().enumerate() {
        let name = format!("v{v}");
        inst.add_function(&name, grid.vertices[v].clone())?;
        inst.add_constraint(&name, ports)?;
    }
    Ok(inst)
}

/// Holant value by enumerating all `2^|E|` edge assignments.
pub fn eval_holant_brute<S: Field>(grid: &HolantGrid<S>, cap: usize) -> Result<S, InstanceError> {
    if grid.edges.len() > cap {
        return Err(InstanceError::CapExceeded {
            what: "edge count",
            got: grid.edges.len(),
            cap,
        });
    }
    brute_force(&holant_to_csp(grid)?, cap)
}

/// Bipartite grid of `#{=_1,=_2,…} | F` with the same value as `inst`.
///
/// Each variable of degree d ≥ 1 becomes a left `=_d`; each constraint a
/// right vertex. Variables of degree 0 have no vertex; their factor of 2
/// each is returned as the second component: `Z(inst) = ledger · Holant`.
pub fn csp_to_holant<S: Field>(
    inst: &CspInstance<S>,
) -> Result<(BipartiteGrid<S>, S), InstanceError> {
    inst.validate()?;
    let degrees = inst.degrees();
    let mut out = BipartiteGrid {
        grid: HolantGrid::new(),
        sides: Vec::new(),
    };
    let mut left = vec![usize::MAX; inst.num_vars];
    let mut isolated = 0u64;
    for v in 0..inst.num_vars {
        if degrees[v] == 0 {
            isolated += 1;
        } else {
            let arity = degrees[v];
            if arity > crate::signature::MAX_ARITY {
                return Err(InstanceError::CapExceeded {
                    what: "variable degree",
                    got: arity,
                    cap: crate::signature::MAX_ARITY,
                });
            }
            left[v] = out.add_vertex(Signature::equality(arity), Side::Left);
        }
    }
    let mut next_port = vec![0usize; inst.num_vars];
    for c in &inst.constraints {
        let r = out.add_vertex(inst.signature_of(c).clone(), Side::Right);
        for (p, &v) in c.vars.iter().enumerate() {
            out.grid.add_edge((left[v], next_port[v]), (r, p));
            next_port[v] += 1;
        }
    }
    Ok((out, S::from_int(2).pow(isolated)))
}
