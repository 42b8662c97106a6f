//! Integer and rational polynomial helpers. Coefficients are ascending:
//! `coeffs[k]` multiplies `x^k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;

pub type Q128 = Ratio<i128>;

pub fn degree(coeffs: &[i64]) -> usize {
    coeffs.len().saturating_sub(1)
}

pub fn eval(coeffs: &[i64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c as f64)
}

fn eval_derivative(coeffs: &[i64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| {
            acc * z + (k as f64) * c as f64
        })
}

fn newton(coeffs: &[i64], mut z: Complex64, real: bool) -> Result<Complex64> {
    for _ in 0..200 {
        let d = eval_derivative(coeffs, z);
        if d.norm() == 0.0 {
            return Err(Error::RootConvergence(format!(
                "vanishing derivative at {z} for {coeffs:?}"
            )));
        }
        let mut step = eval(coeffs, z) / d;
        if real {
            step.im = 0.0;
        }
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    // Newton may oscillate in the last ulp; accept if the residual is tiny.
    if eval(coeffs, z).norm() < 1e-12 * scale(coeffs, z) {
        Ok(z)
    } else {
        Err(Error::RootConvergence(format!(
            "Newton refinement stalled near {z} for {coeffs:?}"
        )))
    }
}

/// Size of the terms of `f(z)`, used to make residual checks relative.
pub fn scale(coeffs: &[i64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| (c as f64).abs() * r.powi(k as i32))
        .sum::<f64>()
        .max(1.0)
}

/// Roots of a monic integer polynomial: all real roots, then one root of each
/// complex-conjugate pair (the one with positive imaginary part).
pub fn roots(coeffs: &[i64]) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let n = degree(coeffs);
    if n == 1 {
        return Ok((vec![-(coeffs[0] as f64)], vec![]));
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -(coeffs[i] as f64);
    }
    let raw = companion.complex_eigenvalues();

    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = 0usize;
    for z0 in raw.iter() {
        let z = newton(coeffs, *z0, false)?;
        if z.im.abs() < 1e-9 * z.norm().max(1.0) {
            let r = newton(coeffs, Complex64::new(z.re, 0.0), true)?;
            reals.push(r.re);
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower += 1;
        }
    }
    if upper.len() != lower || reals.len() + 2 * upper.len() != n {
        return Err(Error::RootConvergence(format!(
            "root classification inconsistent for {coeffs:?}: {} real, {} upper, {} lower",
            reals.len(),
            upper.len(),
            lower
        )));
    }
    for (i, a) in reals.iter().enumerate() {
        for b in &reals[i + 1..] {
            if (a - b).abs() < 1e-9 * a.abs().max(1.0) {
                return Err(Error::RootConvergence(format!(
                    "real roots {a} and {b} collapsed during refinement"
                )));
            }
        }
    }
    for (i, a) in upper.iter().enumerate() {
        for b in &upper[i + 1..] {
            if (a - b).norm() < 1e-9 * a.norm().max(1.0) {
                return Err(Error::RootConvergence(format!(
                    "complex roots {a} and {b} collapsed during refinement"
                )));
            }
        }
    }
    reals.sort_by(|a, b| b.total_cmp(a));
    upper.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok((reals, upper))
}

/// Resultant of `f` and `f'` via the Sylvester determinant. Nonzero iff `f`
/// has no repeated root.
pub fn discriminant_resultant(coeffs: &[i64]) -> i128 {
    let n = degree(coeffs);
    if n <= 1 {
        return 1;
    }
    let deriv: Vec<i128> = (1..=n).map(|k| k as i128 * coeffs[k] as i128).collect();
    let f: Vec<i128> = coeffs.iter().map(|&c| c as i128).collect();
    let size = 2 * n - 1;
    let mut s = IntMatrix::zeros(size, size);
    // rows hold descending coefficients shifted right
    for r in 0..n - 1 {
        for (k, &c) in f.iter().rev().enumerate() {
            s.set(r, r + k, c);
        }
    }
    for r in 0..n {
        for (k, &c) in deriv.iter().rev().enumerate() {
            s.set(n - 1 + r, r + k, c);
        }
    }
    s.det()
}

/// Coefficients (ascending, real parts) of `∏ (x − r)` over the given roots.
fn product_poly(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        p = next;
    }
    p
}

/// Detects a monic integer factor of positive degree below `deg f` by
/// testing every conjugation-closed subset of roots.
pub fn has_integer_factor(reals: &[f64], complex: &[Complex64]) -> bool {
    let r1 = reals.len();
    let r2 = complex.len();
    let total = r1 + r2;
    let n = r1 + 2 * r2;
    for mask in 1u64..(1u64 << total) - 1 {
        let mut subset = Vec::new();
        for (i, &x) in reals.iter().enumerate() {
            if mask >> i & 1 == 1 {
                subset.push(Complex64::new(x, 0.0));
            }
        }
        for (i, &z) in complex.iter().enumerate() {
            if mask >> (r1 + i) & 1 == 1 {
                subset.push(z);
                subset.push(z.conj());
            }
        }
        if subset.is_empty() || subset.len() == n {
            continue;
        }
        let p = product_poly(&subset);
        if p
            .iter()
            .all(|c| (c.re - c.re.round()).abs() < 1e-6 * c.re.abs().max(1.0) && c.im.abs() < 1e-6)
        {
            return true;
        }
    }
    false
}

/// Multiplies two rational polynomials and reduces modulo the monic `f`.
pub fn mul_mod(a: &[Q128], b: &[Q128], f: &[i64]) -> Vec<Q128> {
    let n = degree(f);
    let zero = Q128::from_integer(0);
    let mut prod = vec![zero; a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += *x * *y;
        }
    }
    for k in (n..prod.len()).rev() {
        let lead = prod[k];
        if lead != zero {
            for (t, &c) in f.iter().enumerate().take(n) {
                prod[k - n + t] -= lead * Q128::from_integer(c as i128);
            }
            prod[k] = zero;
        }
    }
    prod.truncate(n);
    prod.resize(n, zero);
    prod
}
