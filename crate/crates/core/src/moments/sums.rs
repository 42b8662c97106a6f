//! Ideal sums, unit-cube sums and the Thunder-type summation bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{AlgInt, FieldHandle};

/// Ideal norm cap used by [`zeta_bound_value`].
pub const ZETA_CAP: u64 = 1 << 16;

/// `Σ_{(q)} Σ_{(p)} 1/(N(p) N(q))^{d/2}` over principal ideals with
/// `N(p) < N(q) ≤ cap` and `(p) + (q) = O_K`.
pub fn rogers_tail_sum(field: &FieldHandle, d: u32, cap: u64) -> Result<f64> {
    if d <= 2 {
        return Err(Error::arg(format!("the tail sum diverges for d ≤ 2, got d = {d}")));
    }
    if cap == 0 {
        return Err(Error::arg("norm cap must be ≥ 1"));
    }
    let ideals = field.principal_ideals(cap as f64)?;
    let norms: Vec<u64> = ideals.iter().map(|i| i.norm).collect();
    let e = -(d as f64) / 2.0;
    let weights: Vec<f64> = norms.iter().map(|&n| (n as f64).powf(e)).collect();
    let partial: Vec<f64> = (0..ideals.len())
        .into_par_iter()
        .map(|qi| {
            let nq = norms[qi];
            let mut s = 0.0;
            for pi in 0..qi {
                if norms[pi] >= nq {
                    break;
                }
                if coprime_with_norms(field, &ideals[pi].generator, norms[pi], &ideals[qi].generator, nq) {
                    s += weights[pi];
                }
            }
            s * weights[qi]
        })
        .collect();
    Ok(partial.iter().sum())
}

fn coprime_with_norms(field: &FieldHandle, a: &AlgInt, na: u64, b: &AlgInt, nb: u64) -> bool {
    if num_integer::gcd(na, nb) == 1 {
        return true;
    }
    field.ideal_sum_index(a, b) == Some(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaBound {
    pub value: f64,
    pub cap: u64,
    /// Value at `cap` minus the value at `cap / 2`.
    pub last_doubling_delta: f64,
}

/// `1 + |1/(1 − d/2)| ζ_K(d−1) + 2^{d/2−1}/(d/2 − 1) ζ_K(d/2) + ζ_K(d/2)`
/// with each zeta truncated to principal ideals of norm at most `cap`.
pub fn zeta_bound_value(field: &FieldHandle, d: u32, cap: u64) -> Result<ZetaBound> {
    if d <= 2 {
        return Err(Error::arg(format!("the zeta bound needs d ≥ 3, got d = {d}")));
    }
    if cap < 2 {
        return Err(Error::arg("zeta cap must be ≥ 2"));
    }
    let ideals = field.principal_ideals(cap as f64)?;
    let h = d as f64 / 2.0;
    let eval = |limit: u64| {
        let zeta = |s: f64| -> f64 {
            ideals
                .iter()
                .take_while(|i| i.norm <= limit)
                .map(|i| (i.norm as f64).powf(-s))
                .sum()
        };
        let zh = zeta(h);
        1.0 + (1.0 / (1.0 - h)).abs() * zeta(d as f64 - 1.0) + 2f64.powf(h - 1.0) / (h - 1.0) * zh + zh
    };
    let value = eval(cap);
    Ok(ZetaBound {
        value,
        cap,
        last_doubling_delta: value - eval(cap / 2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitCubeSum {
    pub value: f64,
    /// Upper bound for the terms outside `max |v_ν| ≤ box_cap`.
    pub tail_bound: f64,
    pub terms: u64,
}

/// `Σ_v ∏_ν min(1, e^{d_ν v_ν})` over `v ∈ Z^{#S}` with
/// `−L ≤ Σ v_ν ≤ #S − L` and `max |v_ν| ≤ box_cap`, where `L = log N(γ)`.
pub fn unit_cube_sum(field: &FieldHandle, log_norm: f64, box_cap: i64) -> Result<UnitCubeSum> {
    if box_cap < 10 {
        return Err(Error::arg(format!("box cap must be ≥ 10, got {box_cap}")));
    }
    if !log_norm.is_finite() {
        return Err(Error::arg("log N(γ) must be finite"));
    }
    let d_nu = field.d_nu();
    let s = d_nu.len();
    let lo_sum = -log_norm;
    let hi_sum = s as f64 - log_norm;
    let mut v = vec![-box_cap; s];
    let mut value = 0.0;
    let mut terms = 0u64;
    loop {
        let total = v.iter().sum::<i64>() as f64;
        if total >= lo_sum - 1e-12 && total <= hi_sum + 1e-12 {
            let exponent: i64 = v.iter().zip(&d_nu).map(|(&x, &d)| (d as i64 * x).min(0)).sum();
            value += (exponent as f64).exp();
            terms += 1;
        }
        let mut k = s;
        loop {
            if k == 0 {
                return Ok(UnitCubeSum {
                    value,
                    tail_bound: unit_cube_tail(s, log_norm, box_cap),
                    terms,
                });
            }
            k -= 1;
            if v[k] < box_cap {
                v[k] += 1;
                for x in v.iter_mut().skip(k + 1) {
                    *x = -box_cap;
                }
                break;
            }
        }
    }
}

/// [`unit_cube_sum`] at `L = log |N(γ)|`.
pub fn unit_cube_sum_for(field: &FieldHandle, gamma: &AlgInt, box_cap: i64) -> Result<UnitCubeSum> {
    if gamma.is_zero() {
        return Err(Error::arg("γ must be nonzero"));
    }
    unit_cube_sum(field, field.field_norm(gamma).ln(), box_cap)
}

/// A term outside the box has negative mass `N = Σ max(0, −v_ν)` of at least
/// `N0`, and is at most `e^{−N}`. For given `N` there are at most
/// `C(N+s−1, s−1)` negative parts and `C(K+s, s)` positive parts with
/// `K = ⌊N + s − L⌋`.
fn unit_cube_tail(s: usize, log_norm: f64, box_cap: i64) -> f64 {
    let b = box_cap as f64;
    let n0 = (b + 1.0 - s as f64 + log_norm).ceil().min(b + 1.0).max(0.0) as u64;
    let mut total = 0.0;
    let mut n = n0;
    loop {
        let k = (n as f64 + s as f64 - log_norm).floor();
        let term = if k < 0.0 {
            0.0
        } else {
            binom(n + s as u64 - 1, s as u64 - 1) * binom(k as u64 + s as u64, s as u64) * (-(n as f64)).exp()
        };
        total += term;
        if n > n0 + 20 && term < total * 1e-17 {
            return total;
        }
        if n > n0 + 100_000 {
            return total;
        }
        n += 1;
    }
}

fn binom(n: u64, k: u64) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThunderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub terms: usize,
    /// `max_k |k − c1 g_k^{c2}| / g_k^{c3}` over the sorted values `g_k`.
    pub count_deviation: f64,
}

/// Compares `Σ_{g(w) ≤ t} F(g(w))` with
/// `∫_{1/2}^t x^{c2−1} F(x) dx + 2^{−c2} F(1/2)`.
///
/// `values_up_to(x)` lists the values `g(w) ≤ x` with multiplicity. `F`
/// must be non-increasing and convex on `(0, t]`, checked on a grid.
pub fn thunder_check(
    c1: f64,
    c2: f64,
    c3: f64,
    values_up_to: impl Fn(f64) -> Vec<f64>,
    f: impl Fn(f64) -> f64,
    t: f64,
) -> Result<ThunderReport> {
    if !(t > 0.5) || !t.is_finite() {
        return Err(Error::arg(format!("t must be finite and > 1/2, got {t}")));
    }
    if !(c2 > 0.0) {
        return Err(Error::arg(format!("c2 must be positive, got {c2}")));
    }
    check_shape(&f, t)?;
    let mut values = values_up_to(t);
    values.retain(|&g| g <= t);
    values.sort_by(f64::total_cmp);
    let lhs: f64 = values.iter().map(|&g| f(g)).sum();
    let integrand = |u: f64| (c2 * u).exp() * f(u.exp());
    let integral = adaptive_simpson(&integrand, 0.5f64.ln(), t.ln(), 1e-9);
    let rhs = integral + 2f64.powf(-c2) * f(0.5);
    let count_deviation = values
        .iter()
        .enumerate()
        .map(|(k, &g)| ((k + 1) as f64 - c1 * g.powf(c2)).abs() / g.powf(c3))
        .fold(0.0, f64::max);
    Ok(ThunderReport {
        lhs,
        rhs,
        holds: lhs < rhs,
        terms: values.len(),
        count_deviation,
    })
}

fn check_shape(f: &impl Fn(f64) -> f64, t: f64) -> Result<()> {
    const POINTS: usize = 2000;
    let (a, b) = (1e-3f64.ln(), t.ln());
    let xs: Vec<f64> = (0..POINTS)
        .map(|k| (a + (b - a) * k as f64 / (POINTS - 1) as f64).exp())
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::arg("F must be finite on (0, t]"));
    }
    let tol = |y: f64| 1e-9 * y.abs() + 1e-300;
    let mut prev_slope = f64::NEG_INFINITY;
    for k in 0..POINTS - 1 {
        if ys[k + 1] > ys[k] + tol(ys[k]) {
            return Err(Error::arg(format!("F increases near x = {:.6}", xs[k])));
        }
        let slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
        if slope < prev_slope - 1e-7 * prev_slope.abs() - 1e-300 {
            return Err(Error::arg(format!("F′ is not non-decreasing near x = {:.6}", xs[k])));
        }
        prev_slope = slope;
    }
    Ok(())
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// `g = id` on the positive integers.
pub fn integer_values(x: f64) -> Vec<f64> {
    (1..=x.floor().max(0.0) as u64).map(|k| k as f64).collect()
}

/// Norms of the nonzero principal ideals of `O_K`.
pub fn ideal_norm_values(field: &FieldHandle) -> impl Fn(f64) -> Vec<f64> + '_ {
    move |x| {
        if x < 1.0 {
            return Vec::new();
        }
        field
            .principal_ideals(x)
            .map(|v| v.iter().map(|i| i.norm as f64).collect())
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::builtin;

    #[test]
    fn rogers_examples() {
        let q = builtin("Q").unwrap();
        assert!((rogers_tail_sum(&q, 3, 2).unwrap() - 2f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(rogers_tail_sum(&q, 3, 1).unwrap(), 0.0);
        assert!(rogers_tail_sum(&q, 2, 10).is_err());
        let a = rogers_tail_sum(&q, 3, 100).unwrap();
        let b = rogers_tail_sum(&q, 3, 200).unwrap();
        assert!(b > a);
    }

    #[test]
    fn zeta_bound_rational() {
        let q = builtin("Q").unwrap();
        let z = zeta_bound_value(&q, 3, ZETA_CAP).unwrap();
        let zeta = |s: f64| (1..=ZETA_CAP).map(|n| (n as f64).powf(-s)).sum::<f64>();
        let expect = 1.0 + 2.0 * zeta(2.0) + 2f64.sqrt() / 0.5 * zeta(1.5) + zeta(1.5);
        assert!((z.value - expect).abs() < 1e-9);
        assert!(z.value > 1.0 && z.last_doubling_delta > 0.0);
        let z4 = zeta_bound_value(&q, 4, 1000).unwrap();
        let expect4 = 1.0 + zeta_at(3.0, 1000) + 2.0 * zeta_at(2.0, 1000) + zeta_at(2.0, 1000);
        assert!((z4.value - expect4).abs() < 1e-9);
        assert!(zeta_bound_value(&q, 2, 100).is_err());
    }

    fn zeta_at(s: f64, cap: u64) -> f64 {
        (1..=cap).map(|n| (n as f64).powf(-s)).sum()
    }

    #[test]
    fn unit_cube_examples() {
        let gi = builtin("Qi").unwrap();
        let r = unit_cube_sum(&gi, 0.0, 10).unwrap();
        assert_eq!((r.value, r.terms), (2.0, 2));
        let q = builtin("Q").unwrap();
        let r = unit_cube_sum(&q, 2.0, 10).unwrap();
        assert!((r.value - ((-2f64).exp() + (-1f64).exp())).abs() < 1e-15);
        assert!(unit_cube_sum(&q, 0.0, 5).is_err());
        let r = unit_cube_sum_for(&gi, &AlgInt::new(vec![1, 1]), 10).unwrap();
        assert!(r.value > 0.0);
    }

    #[test]
    fn unit_cube_tail_dominates_growth() {
        let k = builtin("Qsqrt2").unwrap();
        let small = unit_cube_sum(&k, 1.0, 12).unwrap();
        let large = unit_cube_sum(&k, 1.0, 40).unwrap();
        assert!(large.value - small.value <= small.tail_bound);
        assert!(large.tail_bound < 1e-9);
    }

    #[test]
    fn thunder_examples() {
        let r = thunder_check(1.0, 1.0, 0.0, integer_values, |x| x.powi(-2), 1e6).unwrap();
        assert!((r.lhs - 1.644_933).abs() < 2e-6);
        assert!((r.rhs - 4.0).abs() < 1e-5);
        assert!(r.holds);
        let zero = thunder_check(1.0, 1.0, 0.0, integer_values, |_| 0.0, 100.0).unwrap();
        assert_eq!((zero.lhs, zero.rhs, zero.holds), (0.0, 0.0, false));
        assert!(thunder_check(1.0, 1.0, 0.0, integer_values, |x| x, 10.0).is_err());
        // decreasing but concave
        assert!(thunder_check(1.0, 1.0, 0.0, integer_values, |x| 100.0 - x * x, 5.0).is_err());
    }

    #[test]
    fn thunder_gaussian_ideals() {
        let gi = builtin("Qi").unwrap();
        let r = thunder_check(
            std::f64::consts::PI / 4.0,
            1.0,
            0.5,
            ideal_norm_values(&gi),
            |x| x.powf(-1.5),
            1e4,
        )
        .unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.count_deviation < 5.0);
    }
}
