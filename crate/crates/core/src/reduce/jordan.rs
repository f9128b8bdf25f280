//! Interpolating `=₂` from a non-degenerate binary `H` through powers
//! `H^y` realized by paths, in the diagonalizable and the Jordan case.

use serde_json::json;

use crate::instance::{BipartiteGrid, Stats};
use crate::numeric::{Field, Mode, Tolerance};
use crate::signature::Signature;

use super::gadgets::{sig_matches, stretch};
use super::interp::{for_each_index, APPROX_SYSTEM_TOL, MAX_SYSTEM_SIZE};
use super::linalg::{cond_estimate, kron_solve, Matrix};
use super::oracle::GridOracleFn;
use super::trace::{max_stats, ReductionTrace, TraceStep};
use super::ReduceError;

/// Reject interpolation systems whose condition estimate exceeds this.
pub const MAX_CONDITION: f64 = 1e8;

const OP: &str = "interpolate_eq2_from_H";

enum Spectrum<S> {
    /// Distinct or equal eigenvalues with a full eigenbasis.
    Diagonal(S, S),
    /// A single eigenvalue with a 2×2 Jordan block.
    Jordan(S),
}

fn spectrum<S: Field>(h: &Signature<S>) -> Result<Spectrum<S>, ReduceError> {
    let [[a, b], [c, d]] = h.matrix()?;
    let det = a.clone() * d.clone() - b.clone() * c.clone();
    let tr = a.clone() + d.clone();
    let disc = tr.clone() * tr.clone() - S::from_int(4) * det.clone();
    let half = S::from_ratio(1, 2);
    let disc_zero = match S::MODE {
        Mode::Exact => disc.is_zero(),
        Mode::Approx => {
            let scale = tr.to_complex().norm_sqr() + det.to_complex().norm();
            disc.to_complex().norm() <= 1e-9 * scale.max(1e-300)
        }
    };
    if disc_zero {
        let lambda = tr * half;
        let scalar = Signature::from_matrix([
            [lambda.clone(), S::zero()],
            [S::zero(), lambda.clone()],
        ]);
        return Ok(if sig_matches(h, &scalar) {
            Spectrum::Diagonal(lambda.clone(), lambda)
        } else {
            Spectrum::Jordan(lambda)
        });
    }
    let root = disc.nth_roots(2).into_iter().next().ok_or_else(|| {
        ReduceError::Precondition("eigenvalues of H are not representable in exact mode".into())
    })?;
    Ok(Spectrum::Diagonal(
        (tr.clone() + root.clone()) * half.clone(),
        (tr - root) * half,
    ))
}

/// Recovers the Holant value of `grid` from grids in which each designated
/// right-side `=₂` vertex of block `i` is replaced by a path realizing
/// `H^{y_i}`. If the eigenvalue ratio is a root of unity of order `k`, a
/// single query with every vertex replaced by `H^k = λ^k·I` suffices.
pub fn interpolate_eq2_from_h<S: Field>(
    grid: &BipartiteGrid<S>,
    designated: &[usize],
    h: &Signature<S>,
    d: usize,
    oracle: GridOracleFn<S>,
    trace: &ReductionTrace,
) -> Result<S, ReduceError> {
    if d == 0 {
        return Err(ReduceError::Precondition("block size must be at least 1".into()));
    }
    if h.determinant()?.is_zero() {
        return Err(ReduceError::Precondition("H is degenerate".into()));
    }
    let scratch = ReductionTrace::new();
    let before = grid.stats();
    let m = designated.len();
    let spec = spectrum(h)?;
    if let Spectrum::Diagonal(l1, l2) = &spec {
        let ratio = l1.checked_div(l2).expect("nonzero eigenvalue");
        if let Some(k) = ratio.root_of_unity_order(&Tolerance::default()) {
            let g = stretch(grid, designated, h, k as usize, &scratch)?;
            let z = oracle(&g)?;
            let scale = l2.pow((k as usize * m) as u64);
            let ledger = scale.inv().expect("nonzero eigenvalue");
            trace.record(
                TraceStep::new(OP, before, g.stats(), 1, ledger.to_scalar())
                    .with_detail(json!({ "case": "root_of_unity", "order": k })),
            );
            return Ok(z * ledger);
        }
    }

    let blocks: Vec<&[usize]> = designated.chunks(d).collect();
    let dims: Vec<usize> = blocks.iter().map(|b| b.len() + 1).collect();
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(x).filter(|&t| t <= MAX_SYSTEM_SIZE))
        .ok_or_else(|| ReduceError::Precondition("interpolation system too large".into()))?;
    let (lead, factors): (&S, Vec<Matrix<S>>) = match &spec {
        Spectrum::Diagonal(l1, l2) => {
            let r = l2.checked_div(l1).expect("nonzero eigenvalue");
            (
                l1,
                dims.iter()
                    .map(|&n| {
                        (1..=n)
                            .map(|y| (0..n).map(|t| r.pow((y * t) as u64)).collect())
                            .collect()
                    })
                    .collect(),
            )
        }
        Spectrum::Jordan(l) => (
            l,
            dims.iter()
                .map(|&n| {
                    (1..=n)
                        .map(|y| (0..n).map(|t| S::from_int(y as i64).pow(t as u64)).collect())
                        .collect()
                })
                .collect(),
        ),
    };
    for f in &factors {
        let cond = cond_estimate(f);
        if cond > MAX_CONDITION {
            return Err(ReduceError::IllConditioned(cond));
        }
    }
    let mut grids = Vec::with_capacity(total);
    let mut divisors = Vec::with_capacity(total);
    let mut failure = None;
    for_each_index(&dims, |idx| {
        if failure.is_some() {
            return;
        }
        let mut g = grid.clone();
        let mut div = S::one();
        for (block, &yi) in blocks.iter().zip(idx) {
            let y = yi + 1;
            match stretch(&g, block, h, y, &scratch) {
                Ok(next) => g = next,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
            div = div * lead.pow((y * block.len()) as u64);
        }
        grids.push(g);
        divisors.push(div);
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let mut rhs = Vec::with_capacity(total);
    for (g, dv) in grids.iter().zip(&divisors) {
        rhs.push(oracle(g)?.checked_div(dv).expect("nonzero eigenvalue"));
    }
    let rho = kron_solve(&factors, &rhs, APPROX_SYSTEM_TOL)?;
    let (z, case) = match spec {
        Spectrum::Diagonal(..) => (rho.into_iter().fold(S::zero(), |a, b| a + b), "diagonal"),
        Spectrum::Jordan(_) => (rho[0].clone(), "jordan"),
    };
    let after = grids.iter().map(|g| g.stats()).fold(Stats::default(), max_stats);
    trace.record(
        TraceStep::new(OP, before, after, total, S::one().to_scalar()).with_detail(json!({
            "case": case,
            "block_size": d,
            "blocks": blocks.iter().map(|b| b.len()).collect::<Vec<_>>(),
        })),
    );
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{eval_holant_brute, HolantGrid, Side};
    use crate::numeric::{ApproxComplex, ExactComplex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type A = ApproxComplex;

    fn a(re: f64) -> A {
        A::new(re, 0.0)
    }

    /// Random grid: left equalities, right random unaries and binaries,
    /// plus `k` designated right `=₂` vertices.
    fn random_grid(rng: &mut ChaCha8Rng, k: usize) -> (BipartiteGrid<A>, Vec<usize>) {
        let mut g = BipartiteGrid {
            grid: HolantGrid::new(),
            sides: Vec::new(),
        };
        let mut right_ports = Vec::new();
        let mut designated = Vec::new();
        for _ in 0..k {
            let v = g.add_vertex(Signature::equality(2), Side::Right);
            designated.push(v);
            right_ports.extend([(v, 0), (v, 1)]);
        }
        for _ in 0..rng.gen_range(1..=3) {
            let arity = rng.gen_range(1..=2);
            let vals = (0..1 << arity).map(|_| a(rng.gen_range(-2..=3) as f64)).collect();
            let v = g.add_vertex(Signature::new(arity, vals).unwrap(), Side::Right);
            right_ports.extend((0..arity).map(|p| (v, p)));
        }
        // split right ports among left equalities of arity 1..=3
        let mut i = 0;
        while i < right_ports.len() {
            let arity = rng.gen_range(1..=3).min(right_ports.len() - i);
            let v = g.add_vertex(Signature::equality(arity), Side::Left);
            for p in 0..arity {
                g.grid.add_edge((v, p), right_ports[i]);
                i += 1;
            }
        }
        (g, designated)
    }

    fn brute(g: &BipartiteGrid<A>) -> Result<A, ReduceError> {
        Ok(eval_holant_brute(&g.grid, 24)?)
    }

    fn rel_err(x: &A, y: &A) -> f64 {
        (x.0 - y.0).norm() / y.0.norm().max(1.0)
    }

    #[test]
    fn diagonal_single_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, des) = random_grid(&mut rng, 1);
        let h = Signature::binary(a(1.0), a(0.0), a(0.0), a(2.0));
        let z = interpolate_eq2_from_h(&g, &des, &h, 1, &brute, &ReductionTrace::new()).unwrap();
        assert!(rel_err(&z, &brute(&g).unwrap()) <= 1e-9);
    }

    #[test]
    fn jordan_block_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = Signature::binary(a(1.0), a(1.0), a(0.0), a(1.0));
        for _ in 0..10 {
            let k = rng.gen_range(1..=3);
            let (g, des) = random_grid(&mut rng, k);
            let d = rng.gen_range(1..=2);
            let t = ReductionTrace::new();
            let z = interpolate_eq2_from_h(&g, &des, &h, d, &brute, &t).unwrap();
            assert!(rel_err(&z, &brute(&g).unwrap()) <= 1e-6);
            assert_eq!(t.steps()[0].detail.as_ref().unwrap()["case"], "jordan");
        }
    }

    #[test]
    fn non_symmetric_diagonalizable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = Signature::binary(a(2.0), a(1.0), a(1.0), a(-1.0));
        for _ in 0..5 {
            let (g, des) = random_grid(&mut rng, 2);
            let z = interpolate_eq2_from_h(&g, &des, &h, 2, &brute, &ReductionTrace::new()).unwrap();
            assert!(rel_err(&z, &brute(&g).unwrap()) <= 1e-6);
        }
    }

    #[test]
    fn root_of_unity_ratio_uses_direct_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (g, des) = random_grid(&mut rng, 2);
        let g: BipartiteGrid<ExactComplex> = BipartiteGrid {
            grid: HolantGrid {
                vertices: g
                    .grid
                    .vertices
                    .iter()
                    .map(|s| s.map(|v| ExactComplex::from_int(v.re() as i64)))
                    .collect(),
                edges: g.grid.edges.clone(),
            },
            sides: g.sides.clone(),
        };
        // eigenvalues 3 and -3: ratio -1, so H² = 9·I
        let h = Signature::<ExactComplex>::from_ints(2, &[0, 3, 3, 0]).unwrap();
        let o = |x: &BipartiteGrid<ExactComplex>| Ok(eval_holant_brute(&x.grid, 24)?);
        let t = ReductionTrace::new();
        let z = interpolate_eq2_from_h(&g, &des, &h, 1, &o, &t).unwrap();
        assert_eq!(z, eval_holant_brute(&g.grid, 24).unwrap());
        assert_eq!(t.steps()[0].oracle_calls, 1);
    }

    #[test]
    fn degenerate_h_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (g, des) = random_grid(&mut rng, 1);
        let h = Signature::binary(a(1.0), a(2.0), a(2.0), a(4.0));
        let r = interpolate_eq2_from_h(&g, &des, &h, 1, &brute, &ReductionTrace::new());
        assert!(matches!(r, Err(ReduceError::Precondition(_))));
    }
}
