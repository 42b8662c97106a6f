//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the enumerator or the coefficient-box code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use nfapprox::{FieldHandle, Theta, WeightScheme};
use num_complex::Complex64;

/// Real coordinates (`Re`, plus `Im` at complex places) of each basis
/// element, as columns.
pub fn basis_matrix(field: &FieldHandle) -> DMatrix<f64> {
    let deg = field.degree();
    let mut m = DMatrix::zeros(deg, deg);
    for k in 0..deg {
        let mut row = 0;
        for (v, p) in field.places().iter().enumerate() {
            let z = field.basis_embedding(v, k);
            m[(row, k)] = z.re;
            row += 1;
            if !p.is_real() {
                m[(row, k)] = z.im;
                row += 1;
            }
        }
    }
    m
}

fn embed(field: &FieldHandle, coords: &[i64]) -> Vec<Complex64> {
    (0..field.num_places())
        .map(|v| {
            coords
                .iter()
                .enumerate()
                .map(|(k, &c)| field.basis_embedding(v, k) * c as f64)
                .sum()
        })
        .collect()
}

fn size(z: &[Complex64], w: &[f64]) -> f64 {
    z.iter().zip(w).map(|(z, w)| z.norm().powf(1.0 / w)).fold(0.0, f64::max)
}

/// Per-coordinate bounds for integers whose place values satisfy
/// `|ι_ν| < r_ν`, centred at real coordinates `center`.
fn coord_window(field: &FieldHandle, inv: &DMatrix<f64>, center: &[f64], r: &[f64]) -> Vec<(i64, i64)> {
    let deg = field.degree();
    let mut row_r = Vec::new();
    for (v, p) in field.places().iter().enumerate() {
        row_r.push(r[v]);
        if !p.is_real() {
            row_r.push(r[v]);
        }
    }
    let c = inv * nalgebra::DVector::from_column_slice(center);
    (0..deg)
        .map(|k| {
            let spread: f64 = (0..deg).map(|j| inv[(k, j)].abs() * row_r[j]).sum();
            ((c[k] - spread).floor() as i64 - 1, (c[k] + spread).ceil() as i64 + 1)
        })
        .collect()
}

fn each_in(window: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    let mut x: Vec<i64> = window.iter().map(|w| w.0).collect();
    loop {
        f(&x);
        let mut k = x.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if x[k] < window[k].1 {
                x[k] += 1;
                for j in k + 1..x.len() {
                    x[j] = window[j].0;
                }
                break;
            }
        }
    }
}

fn real_coords(field: &FieldHandle, z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::new();
    for (z, p) in z.iter().zip(field.places()) {
        out.push(z.re);
        if !p.is_real() {
            out.push(z.im);
        }
    }
    out
}

/// `#{(p, q) : 1 ≤ ‖q‖_b < e^T, ‖ϑq − p‖_a ‖q‖_b < c}` for `m = n = 1`
/// by a double loop over coordinate windows.
pub fn naive_count(field: &FieldHandle, theta: &Theta, w: &WeightScheme, c: f64, t: f64) -> u64 {
    assert_eq!((w.m, w.n), (1, 1));
    let deg = field.degree();
    let inv = basis_matrix(field).try_inverse().unwrap();
    let r_q: Vec<f64> = w.b.iter().map(|b| (t * b).exp() * 1.001).collect();
    let q_window = coord_window(field, &inv, &vec![0.0; deg], &r_q);
    let mut count = 0;
    each_in(&q_window, |q| {
        if q.iter().all(|&x| x == 0) {
            return;
        }
        let qe = embed(field, q);
        let ys = size(&qe, &w.b);
        if !(ys >= 1.0 && ys < t.exp() && ys.ln() < t) {
            return;
        }
        let center: Vec<Complex64> = qe.iter().enumerate().map(|(v, z)| theta.values[v] * z).collect();
        let rho = c / ys;
        let r_p: Vec<f64> = w.a.iter().map(|a| rho.powf(*a) * 1.001).collect();
        let p_window = coord_window(field, &inv, &real_coords(field, &center), &r_p);
        each_in(&p_window, |p| {
            let pe = embed(field, p);
            let x: Vec<Complex64> = center.iter().zip(&pe).map(|(a, b)| a - b).collect();
            if size(&x, &w.a) * ys < c {
                count += 1;
            }
        });
    });
    count
}

/// Rational integers `1..=cap` paired with `p < q`, `gcd(p, q) = 1`:
/// `Σ (pq)^{-d/2}`.
pub fn rational_rogers(d: u32, cap: u64) -> f64 {
    let e = -(d as f64) / 2.0;
    let mut s = 0.0;
    for q in 2..=cap {
        for p in 1..q {
            if num_integer::gcd(p, q) == 1 {
                s += ((p * q) as f64).powf(e);
            }
        }
    }
    s
}

/// Partitions of `m` into exactly `k` positive parts, by listing them.
pub fn partitions_listed(k: usize, m: usize) -> u128 {
    fn rec(k: usize, m: usize, max: usize) -> u128 {
        if k == 0 {
            return u128::from(m == 0);
        }
        (1..=max.min(m)).map(|part| rec(k - 1, m - part, part)).sum()
    }
    rec(k, m, m)
}
