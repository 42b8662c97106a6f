//! Weighted quasi-norms, the regions `E_{T,c}`, `F_{T,c}` and
//! `E_{T,c}(A,B)`, their volumes, and counts of approximates.

mod montecarlo;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{AlgInt, FieldHandle};
use crate::lattice::{Enumerator, KSVec, LatticeSpec};
use crate::moments::target_rate;
use crate::spiralling::{self, CapSpec, Directions};

pub use montecarlo::{mc_integrate, mc_volume, McEstimate, MC_CHUNK};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Weights `a_{iν}`, `b_{jν}` with `Σ d_ν a_{iν} = Σ d_ν b_{jν} = 1`,
/// stored row-major (`a[i * places + ν]`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightScheme {
    pub m: usize,
    pub n: usize,
    pub d_nu: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl WeightScheme {
    pub fn new(field: &FieldHandle, m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let d_nu = field.d_nu();
        let p = d_nu.len();
        if m == 0 || n == 0 {
            return Err(Error::arg("m and n must be positive"));
        }
        if a.len() != m * p || b.len() != n * p {
            return Err(Error::arg(format!(
                "weights need {} a-values and {} b-values ({} places), got {} and {}",
                m * p,
                n * p,
                p,
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::arg("all weights must be positive and finite"));
        }
        let total = |w: &[f64]| -> f64 {
            w.iter().enumerate().map(|(k, x)| d_nu[k % p] as f64 * x).sum()
        };
        let (sa, sb) = (total(&a), total(&b));
        if (sa - 1.0).abs() > NORMALIZATION_TOL || (sb - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::arg(format!(
                "weights must satisfy Σ d_ν a = Σ d_ν b = 1, got {sa} and {sb}"
            )));
        }
        Ok(Self { m, n, d_nu, a, b })
    }

    /// All `a_{iν} = 1/(m deg)` and `b_{jν} = 1/(n deg)`.
    pub fn equal(field: &FieldHandle, m: usize, n: usize) -> Self {
        let p = field.num_places();
        let deg = field.degree() as f64;
        Self {
            m,
            n,
            d_nu: field.d_nu(),
            a: vec![1.0 / (m as f64 * deg); m * p],
            b: vec![1.0 / (n as f64 * deg); n * p],
        }
    }

    /// Rescales arbitrary positive raw weights onto the normalisation.
    pub fn normalized(field: &FieldHandle, m: usize, n: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        let d_nu = field.d_nu();
        let p = d_nu.len();
        let scale = |w: &[f64]| -> Vec<f64> {
            let s: f64 = w.iter().enumerate().map(|(k, x)| d_nu[k % p] as f64 * x).sum();
            w.iter().map(|x| x / s).collect()
        };
        Self::new(field, m, n, scale(a), scale(b))
    }

    pub fn places(&self) -> usize {
        self.d_nu.len()
    }

    pub fn a_at(&self, i: usize, v: usize) -> f64 {
        self.a[i * self.places() + v]
    }

    pub fn b_at(&self, j: usize, v: usize) -> f64 {
        self.b[j * self.places() + v]
    }

    pub fn check_shape(&self, field: &FieldHandle, m: usize, n: usize) -> Result<()> {
        if self.m != m || self.n != n || self.d_nu != field.d_nu() {
            return Err(Error::arg(format!(
                "weight scheme is for (m, n) = ({}, {}) over {} places, lattice is ({m}, {n}) over {}",
                self.m,
                self.n,
                self.places(),
                field.num_places()
            )));
        }
        Ok(())
    }
}

/// `max |x_{iν}|^{1/w_{iν}}`; zero exactly for the zero block.
pub fn quasi_norm(block: &[Complex64], weights: &[f64]) -> f64 {
    debug_assert_eq!(block.len(), weights.len());
    block
        .iter()
        .zip(weights)
        .map(|(z, w)| z.norm_sqr().powf(0.5 / w))
        .fold(0.0, f64::max)
}

/// `size < e^t`, with ties at the boundary excluded even when `e^t`
/// rounds up.
pub(crate) fn below_exp(size: f64, t: f64) -> bool {
    size < t.exp() && size.ln() < t
}

#[derive(Clone, Debug, PartialEq)]
pub enum RegionKind {
    /// `‖x‖_a ‖y‖_b < c`, `1 ≤ ‖y‖_b < e^T`.
    E,
    /// `‖x‖_a ‖y‖_b < c`, `‖y‖_b < e^T`.
    F,
    /// `E` with `π_a(x) ∈ A` and `π_b(y) ∈ B`.
    EAB { a: CapSpec, b: CapSpec },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub c: f64,
    pub t: f64,
}

impl RegionSpec {
    pub fn new(kind: RegionKind, c: f64, t: f64) -> Self {
        Self { kind, c, t }
    }

    pub fn e(c: f64, t: f64) -> Self {
        Self::new(RegionKind::E, c, t)
    }

    pub fn eab(c: f64, t: f64, a: CapSpec, b: CapSpec) -> Self {
        Self::new(RegionKind::EAB { a, b }, c, t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(Error::arg(format!("c must be finite and ≥ 0, got {}", self.c)));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::arg(format!("T must be finite and > 0, got {}", self.t)));
        }
        Ok(())
    }

    pub fn contains(&self, weights: &WeightScheme, point: &KSVec) -> bool {
        let x = point.x_block(weights.m);
        let y = point.y_block(weights.m);
        let ys = quasi_norm(y, &weights.b);
        let xs = quasi_norm(x, &weights.a);
        let shell = below_exp(ys, self.t) && xs * ys < self.c;
        match &self.kind {
            RegionKind::F => shell,
            RegionKind::E => shell && ys >= 1.0,
            RegionKind::EAB { a, b } => {
                if !(shell && ys >= 1.0) {
                    return false;
                }
                let dir = spiralling::directions(weights, point);
                a.contains_direction(dir.x.as_ref()) && b.contains_direction(Some(&dir.y))
            }
        }
    }
}

/// `(p, q)` with `‖ϑq − p‖_a ‖q‖_b < c`; `point` is `(ϑq − p, q)`.
#[derive(Clone, Debug)]
pub struct ApproximateRecord {
    pub p: Vec<AlgInt>,
    pub q: Vec<AlgInt>,
    pub point: KSVec,
    pub value: f64,
    pub q_size: f64,
    pub directions: Option<Directions>,
}

/// `2^{r1 k} π^{r2 k}`: Lebesgue measure of `{‖x‖ < 1}` in `K_S^k`.
pub fn unit_ball_constant(field: &FieldHandle, k: usize) -> f64 {
    let (r1, r2) = field.signature();
    2f64.powi((r1 * k) as i32) * PI.powi((r2 * k) as i32)
}

/// `λ(E_{T,c}) = C_a C_b c T / V_0^d`.
pub fn analytic_volume_e(field: &FieldHandle, weights: &WeightScheme, c: f64, t: f64) -> f64 {
    let d = (weights.m + weights.n) as i32;
    unit_ball_constant(field, weights.m) * unit_ball_constant(field, weights.n) * c * t
        / field.covolume().powi(d)
}

/// Records of `E_{T,c} ∩ Λ_ϑ`.
pub fn approximates(spec: &LatticeSpec, weights: &WeightScheme, c: f64, t: f64) -> Result<Vec<ApproximateRecord>> {
    Enumerator::new(spec, weights, &RegionSpec::e(c, t))?.run()
}

/// `#(E_{T,c} ∩ Λ_ϑ)`.
pub fn count_approximates(spec: &LatticeSpec, weights: &WeightScheme, c: f64, t: f64) -> Result<u64> {
    Ok(approximates(spec, weights, c, t)?.len() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorPoint {
    pub t: f64,
    pub count: u64,
    pub volume: f64,
    pub error: f64,
}

/// `count − λ(E_{T,c})` along an increasing grid, from a single enumeration
/// at the largest `T`.
pub fn error_series(spec: &LatticeSpec, weights: &WeightScheme, c: f64, t_grid: &[f64]) -> Result<Vec<ErrorPoint>> {
    if t_grid.is_empty() {
        return Err(Error::arg("T grid is empty"));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg("T grid must be strictly increasing"));
    }
    let t_max = *t_grid.last().unwrap();
    let records = approximates(spec, weights, c, t_max)?;
    let mut sizes: Vec<f64> = records.iter().map(|r| r.q_size).collect();
    sizes.sort_by(f64::total_cmp);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let count = sizes.iter().filter(|&&s| below_exp(s, t)).count() as u64;
            let volume = analytic_volume_e(spec.field, weights, c, t);
            ErrorPoint {
                t,
                count,
                volume,
                error: count as f64 - volume,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
    /// `max |error| / target_rate(T, ε)` over grid points with `T > e`.
    pub max_rate_ratio: Option<f64>,
}

/// Least-squares slope of `log|error|` against `log T` over the points with
/// `T ≥ t_min_cut` and nonzero error.
pub fn fit_scaling_exponent(series: &[(f64, f64)], t_min_cut: f64, epsilon: f64) -> Result<ScalingFit> {
    if series.iter().all(|&(_, e)| e == 0.0) {
        return Err(Error::arg("all errors are zero, nothing to fit"));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, e)| t >= t_min_cut && e != 0.0 && t > 0.0)
        .map(|&(t, e)| (t.ln(), e.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::arg(format!(
            "need at least 5 nonzero errors beyond T = {t_min_cut}, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("all T values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let max_rate_ratio = series
        .iter()
        .filter(|&&(t, _)| t > std::f64::consts::E)
        .map(|&(t, e)| e.abs() / target_rate(t, epsilon).expect("T > e"))
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    Ok(ScalingFit {
        slope,
        intercept,
        r2,
        points: pts.len(),
        max_rate_ratio,
    })
}
