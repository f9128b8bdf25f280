//! Dense linear algebra over a scalar field, including factor-wise
//! solution of Kronecker-structured systems.

use crate::numeric::{Field, Mode};

use super::ReduceError;

pub type Matrix<S> = Vec<Vec<S>>;

/// Pivots below this fraction of the largest entry count as zero in
/// approximate mode.
const APPROX_PIVOT_EPS: f64 = 1e-13;

fn magnitude<S: Field>(x: &S) -> f64 {
    x.to_complex().norm()
}

/// Gauss-Jordan elimination on `[a | rhs]`, returning the solved columns.
fn eliminate<S: Field>(mut a: Matrix<S>, mut rhs: Matrix<S>) -> Result<Matrix<S>, ReduceError> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) || rhs.len() != n {
        return Err(ReduceError::Singular("matrix is not square".into()));
    }
    let scale = a
        .iter()
        .flatten()
        .map(magnitude)
        .fold(0.0f64, f64::max);
    for col in 0..n {
        let pivot = match S::MODE {
            Mode::Exact => (col..n).find(|&r| !a[r][col].is_zero()),
            Mode::Approx => (col..n)
                .max_by(|&r, &s| magnitude(&a[r][col]).total_cmp(&magnitude(&a[s][col])))
                .filter(|&r| magnitude(&a[r][col]) > APPROX_PIVOT_EPS * scale),
        }
        .ok_or_else(|| ReduceError::Singular(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = a[col][col]
            .inv()
            .ok_or_else(|| ReduceError::Singular(format!("zero pivot in column {col}")))?;
        for x in a[col].iter_mut().chain(rhs[col].iter_mut()) {
            *x = x.clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let v = a[col][c].clone();
                a[r][c] = a[r][c].clone() - f.clone() * v;
            }
            for c in 0..rhs[r].len() {
                let v = rhs[col][c].clone();
                rhs[r][c] = rhs[r][c].clone() - f.clone() * v;
            }
        }
    }
    Ok(rhs)
}

/// Solves `a · x = b`.
pub fn solve<S: Field>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>, ReduceError> {
    let rhs = b.iter().map(|v| vec![v.clone()]).collect();
    Ok(eliminate(a.clone(), rhs)?
        .into_iter()
        .map(|mut row| row.remove(0))
        .collect())
}

pub fn invert<S: Field>(a: &Matrix<S>) -> Result<Matrix<S>, ReduceError> {
    let n = a.len();
    let id = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    eliminate(a.clone(), id)
}

fn norm1<S: Field>(a: &Matrix<S>) -> f64 {
    let n = a.first().map_or(0, |r| r.len());
    (0..n)
        .map(|c| a.iter().map(|row| magnitude(&row[c])).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number `‖A‖₁·‖A⁻¹‖₁`; infinite when singular.
pub fn cond_estimate<S: Field>(a: &Matrix<S>) -> f64 {
    match invert(a) {
        Ok(inv) => norm1(a) * norm1(&inv),
        Err(_) => f64::INFINITY,
    }
}

/// Applies `m` along one axis of a row-major tensor of shape `dims`.
fn mode_product<S: Field>(x: &[S], dims: &[usize], axis: usize, m: &Matrix<S>) -> Vec<S> {
    let r = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut out = x.to_vec();
    for o in 0..outer {
        for inner in 0..stride {
            let at = |k: usize| o * r * stride + k * stride + inner;
            for (row, mrow) in m.iter().enumerate() {
                let mut acc = S::zero();
                for (k, coef) in mrow.iter().enumerate() {
                    if !coef.is_zero() {
                        acc = acc + coef.clone() * x[at(k)].clone();
                    }
                }
                out[at(row)] = acc;
            }
        }
    }
    out
}

/// `(A₁ ⊗ … ⊗ A_B) · x` with the first factor most significant.
pub fn kron_apply<S: Field>(factors: &[Matrix<S>], x: &[S]) -> Vec<S> {
    let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    factors
        .iter()
        .enumerate()
        .fold(x.to_vec(), |acc, (axis, m)| mode_product(&acc, &dims, axis, m))
}

/// Solves `(A₁ ⊗ … ⊗ A_B) · x = b` by inverting each factor separately.
/// The solution is re-multiplied and compared with `b`: exactly in exact
/// mode, within `tol` relative to `max|b|` otherwise.
pub fn kron_solve<S: Field>(factors: &[Matrix<S>], b: &[S], tol: f64) -> Result<Vec<S>, ReduceError> {
    let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    if dims.iter().product::<usize>() != b.len() {
        return Err(ReduceError::Singular("right-hand side has the wrong length".into()));
    }
    let mut x = b.to_vec();
    for (axis, m) in factors.iter().enumerate() {
        x = mode_product(&x, &dims, axis, &invert(m)?);
    }
    let back = kron_apply(factors, &x);
    let ok = match S::MODE {
        Mode::Exact => back == b,
        Mode::Approx => {
            let scale = b.iter().map(magnitude).fold(1e-300, f64::max);
            back.iter()
                .zip(b)
                .all(|(u, v)| magnitude(&(u.clone() - v.clone())) <= tol * scale)
        }
    };
    if !ok {
        return Err(ReduceError::verification(
            "kronecker solve",
            "re-multiplied solution does not reproduce the oracle values",
        ));
    }
    Ok(x)
}
