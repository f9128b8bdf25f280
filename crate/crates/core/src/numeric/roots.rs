//! l-th roots inside Q(ω).
//!
//! A root `c` of `c^l = d` is determined by its four Galois embeddings
//! σ_k(c), k ∈ {1,3,5,7}, each of which is one of the l complex roots of
//! σ_k(d). For every combination of branches the coefficients of `c` are
//! recovered by an inverse discrete transform, rounded to nearby
//! rationals, and kept only if `c^l = d` holds exactly.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

use super::exact::ExactComplex;

const EMBEDDINGS: [i64; 4] = [1, 3, 5, 7];
const MAX_DENOMINATOR: i64 = 1 << 40;

fn complex_roots(z: Complex64, l: u32) -> Vec<Complex64> {
    let r = z.norm().powf(1.0 / l as f64);
    let arg = z.arg();
    (0..l)
        .map(|b| {
            let theta = (arg + 2.0 * std::f64::consts::PI * b as f64) / l as f64;
            Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Best rational approximation by continued fractions, `None` if no
/// convergent with a bounded denominator lands close to `x`.
fn rationalize(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let tol = 1e-9 * x.abs().max(1.0);
    if x.abs() < 1e-12 {
        return Some(BigRational::zero());
    }
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        let ai = BigInt::from_f64(a)?;
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        if k1.to_i64().map_or(true, |k| k > MAX_DENOMINATOR) {
            return None;
        }
        let approx = h1.to_f64()? / k1.to_f64()?;
        if (approx - x).abs() <= tol {
            let r = BigRational::new(h1.clone(), k1.clone());
            return Some(r);
        }
        let frac = rem - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rem = 1.0 / frac;
    }
    None
}

/// All l-th roots of `d` lying in Q(ω), ordered by the branch of the
/// principal embedding (branch 0 is the principal root, which is the
/// positive real root when `d` is a positive rational).
pub fn exact_roots(d: &ExactComplex, l: u32) -> Vec<ExactComplex> {
    assert!(l >= 1);
    if l == 1 {
        return vec![d.clone()];
    }
    if d.is_zero() {
        return vec![ExactComplex::zero()];
    }
    let branches: Vec<Vec<Complex64>> = EMBEDDINGS
        .iter()
        .map(|&k| complex_roots(d.galois(k).to_complex(), l))
        .collect();
    let inv_omega: Vec<Complex64> = (0..8)
        .map(|k| ExactComplex::omega_pow(-(k as i64)).to_complex())
        .collect();

    let mut found: Vec<ExactComplex> = Vec::new();
    let total = (l as usize).pow(4);
    for combo in 0..total {
        let mut idx = [0usize; 4];
        let mut rest = combo;
        // principal embedding varies slowest so results come out in branch order
        for slot in (0..4).rev() {
            idx[slot] = rest % l as usize;
            rest /= l as usize;
        }
        let mut coeffs: Vec<BigRational> = Vec::with_capacity(4);
        let mut ok = true;
        for j in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (e, &k) in EMBEDDINGS.iter().enumerate() {
                let w = inv_omega[((k * j as i64) % 8) as usize];
                acc += branches[e][idx[e]] * w;
            }
            acc /= 4.0;
            if acc.im.abs() > 1e-6 * acc.re.abs().max(1.0) {
                ok = false;
                break;
            }
            match rationalize(acc.re) {
                Some(r) => coeffs.push(r),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let c = ExactComplex::from_coeffs([
            coeffs[0].clone(),
            coeffs[1].clone(),
            coeffs[2].clone(),
            coeffs[3].clone(),
        ]);
        if c.pow(l as u64) == *d && !found.contains(&c) {
            found.push(c);
        }
    }
    found
}
