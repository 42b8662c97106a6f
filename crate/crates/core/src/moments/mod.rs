//! Mean values and bounds: translate averages of the Siegel transform,
//! second moments, overlap volumes, the time-average sandwich, and the
//! series and combinatorial sums in [`sums`] and [`combinatorics`].

pub mod combinatorics;
pub mod sums;

pub use combinatorics::{knessl_keller_ratio, partition_count, z_count, z_count_in_box};
pub use sums::{
    ideal_norm_values, integer_values, rogers_tail_sum, thunder_check, unit_cube_sum, unit_cube_sum_for,
    zeta_bound_value, ThunderReport,
    UnitCubeSum, ZetaBound, ZETA_CAP,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::diophantine::{
    analytic_volume_e, approximates, below_exp, mc_integrate, McEstimate, RegionKind, RegionSpec, WeightScheme,
};
use crate::error::{Error, Result};
use crate::field::{FieldHandle, KElement};
use crate::lattice::{flow_unchecked, Enumerator, LatticeSpec, QList, Theta};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub reference_value: f64,
    pub sample_count: usize,
    pub standard_error: f64,
    /// Exact mean of the translate model, `Σ_q C_a c / (‖q‖_b V_0^m)` over
    /// the `q` that can meet the region (plain `E` only).
    pub translate_expectation: Option<f64>,
}

impl MomentReport {
    fn from_counts(counts: &[u64], reference_value: f64, translate_expectation: Option<f64>) -> Self {
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            empirical_mean: mean,
            empirical_variance: var,
            reference_value,
            sample_count: counts.len(),
            standard_error: (var / n).sqrt(),
            translate_expectation,
        }
    }

    /// `|mean − reference| / standard_error`; infinite if the error is
    /// zero and the values differ.
    pub fn z_score(&self) -> f64 {
        let diff = (self.empirical_mean - self.reference_value).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.standard_error
        }
    }

    /// Variance over the reference volume.
    pub fn variance_ratio(&self) -> f64 {
        self.empirical_variance / self.reference_value
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslateOptions {
    pub n_theta: usize,
    pub seed: u64,
    /// Count `g_s Λ_ϑ` instead of `Λ_ϑ`. Pushing moves the `q`-shell to
    /// `[e^s, e^{s+T})`, where the lattice sum over `q` approaches the
    /// integral; `s = 0` is the literal translate model.
    pub push: f64,
}

impl TranslateOptions {
    pub fn new(n_theta: usize, seed: u64) -> Self {
        Self {
            n_theta,
            seed,
            push: 0.0,
        }
    }

    pub fn with_push(mut self, push: f64) -> Self {
        self.push = push;
        self
    }
}

/// `#(g_s Λ_ϑ ∩ region)` for `n_theta` uniform `ϑ`; draw `i` uses RNG
/// stream `i`.
pub fn translate_counts(
    field: &FieldHandle,
    weights: &WeightScheme,
    region: &RegionSpec,
    opts: &TranslateOptions,
) -> Result<Vec<u64>> {
    region.validate()?;
    if matches!(region.kind, RegionKind::F) {
        return Err(Error::Unbounded(
            "F_{T,c} meets the slab q = 0, where translates do not equidistribute".into(),
        ));
    }
    if opts.n_theta < 2 {
        return Err(Error::arg("need at least 2 draws of ϑ"));
    }
    if !(opts.push >= 0.0) || !opts.push.is_finite() {
        return Err(Error::arg(format!("push time must be finite and ≥ 0, got {}", opts.push)));
    }
    let (m, n) = (weights.m, weights.n);
    weights.check_shape(field, m, n)?;
    if region.c == 0.0 {
        return Ok(vec![0; opts.n_theta]);
    }
    let qlist = QList::build(field, weights, opts.push, opts.push + region.t)?;
    (0..opts.n_theta)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(opts.seed, i as u64);
            let spec = LatticeSpec::new(field, Theta::random(field, m, n, &mut r))?;
            Enumerator::new(&spec, weights, region)?
                .with_flow_time(opts.push)
                .count_with(&qlist)
        })
        .collect()
}

/// Exact expectation of the translate count for `E_{T,c}` pushed by `s`.
pub fn translate_expectation(field: &FieldHandle, weights: &WeightScheme, c: f64, t: f64, push: f64) -> Result<f64> {
    let qlist = QList::build(field, weights, push, push + t)?;
    let per_q = crate::diophantine::unit_ball_constant(field, weights.m) * c
        / field.covolume().powi(weights.m as i32);
    let shrink = (-push).exp();
    let mut sum = 0.0;
    for q in &qlist.items {
        let flowed = q.size * shrink;
        if flowed >= 1.0 && below_exp(flowed, t) {
            sum += per_q / q.size;
        }
    }
    Ok(sum)
}

/// Translate average of `#(region ∩ g_s Λ_ϑ)` against the analytic volume.
pub fn siegel_translate_stats(
    field: &FieldHandle,
    weights: &WeightScheme,
    region: &RegionSpec,
    opts: &TranslateOptions,
) -> Result<MomentReport> {
    if opts.n_theta < 100 {
        return Err(Error::arg(format!("need at least 100 draws of ϑ, got {}", opts.n_theta)));
    }
    let counts = translate_counts(field, weights, region, opts)?;
    let reference = analytic_volume_e(field, weights, region.c, region.t);
    let expectation = match region.kind {
        RegionKind::E if region.c > 0.0 => Some(translate_expectation(field, weights, region.c, region.t, opts.push)?),
        RegionKind::E => Some(0.0),
        _ => None,
    };
    Ok(MomentReport::from_counts(&counts, reference, expectation))
}

/// Same draws as [`siegel_translate_stats`]; the quantity of interest is
/// [`MomentReport::variance_ratio`].
pub fn second_moment_stats(
    field: &FieldHandle,
    weights: &WeightScheme,
    region: &RegionSpec,
    opts: &TranslateOptions,
) -> Result<MomentReport> {
    siegel_translate_stats(field, weights, region, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// `∏_ν min(1, |ι_ν γ|^{-1})^{d_ν} · λ(E)`.
    pub bound: f64,
    pub volume: f64,
}

impl OverlapEstimate {
    pub fn within_bound(&self) -> bool {
        self.estimate <= self.bound + 3.0 * self.std_error
    }
}

/// `λ(E ∩ γ^{-1} E)` by Monte Carlo.
pub fn overlap_volume(
    field: &FieldHandle,
    weights: &WeightScheme,
    region: &RegionSpec,
    gamma: &KElement,
    samples: usize,
    seed: u64,
) -> Result<OverlapEstimate> {
    region.validate()?;
    if gamma.is_zero() {
        return Err(Error::arg("γ must be nonzero"));
    }
    if matches!(region.kind, RegionKind::F) {
        return Err(Error::Unbounded("F_{T,c} has infinite volume".into()));
    }
    let g = field.embed_k(gamma);
    let McEstimate { estimate, std_error, .. } =
        mc_integrate(field, weights, region.c, region.t, samples, seed, |v| {
            region.contains(weights, v) && region.contains(weights, &v.scale_places(&g))
        })?;
    let volume = analytic_volume_e(field, weights, region.c, region.t);
    let factor: f64 = g
        .iter()
        .zip(field.places())
        .map(|(z, p)| (1.0 / z.norm()).min(1.0).powi(p.d_nu as i32))
        .product();
    Ok(OverlapEstimate {
        estimate,
        std_error,
        bound: factor * volume,
        volume,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sandwich {
    /// `#((E_T ∖ E_R) ∩ Λ)`.
    pub lower: u64,
    /// `(1/R) ∫_0^T #(E_R ∩ g_t Λ) dt`, left Riemann sum.
    pub middle: f64,
    /// `#(E_{R+T} ∩ Λ)`.
    pub upper: u64,
    /// `events · dt / R`.
    pub slack: f64,
    /// Entry and exit times of points in `[0, T)`.
    pub events: u64,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower as f64 <= self.middle + self.slack && self.middle <= self.upper as f64 + self.slack
    }
}

pub fn time_average_sandwich(
    spec: &LatticeSpec,
    weights: &WeightScheme,
    c: f64,
    r: f64,
    t: f64,
    dt: f64,
) -> Result<Sandwich> {
    if !(r > 1.0) {
        return Err(Error::arg(format!("R must exceed 1, got {r}")));
    }
    if !(r < t) || !t.is_finite() {
        return Err(Error::arg(format!("need R < T, got R = {r}, T = {t}")));
    }
    if !(dt > 0.0) || dt > r / 10.0 {
        return Err(Error::arg(format!("step must lie in (0, R/10], got {dt}")));
    }
    RegionSpec::e(c, t).validate()?;
    if c == 0.0 {
        return Ok(Sandwich {
            lower: 0,
            middle: 0.0,
            upper: 0,
            slack: 0.0,
            events: 0,
        });
    }
    // every point of g_t Λ ∩ E_R with t ∈ [0, T) lies in E_{R+T}
    let records = approximates(spec, weights, c, r + t)?;
    let lower = records
        .iter()
        .filter(|rec| rec.q_size >= r.exp() && below_exp(rec.q_size, t))
        .count() as u64;
    let upper = records.len() as u64;
    let inner = RegionSpec::e(c, r);
    let steps = (t / dt).ceil() as usize;
    let counts: Vec<u64> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let s = k as f64 * dt;
            records
                .iter()
                .filter(|rec| inner.contains(weights, &flow_unchecked(weights, s, &rec.point)))
                .count() as u64
        })
        .collect();
    let mut middle = 0.0;
    for (k, &n) in counts.iter().enumerate() {
        let width = (t - k as f64 * dt).min(dt);
        middle += n as f64 * width;
    }
    middle /= r;
    let mut events = 0u64;
    for rec in &records {
        let l = rec.q_size.ln();
        for time in [l - r, l] {
            if (0.0..t).contains(&time) {
                events += 1;
            }
        }
    }
    Ok(Sandwich {
        lower,
        middle,
        upper,
        slack: events as f64 * dt / r,
        events,
    })
}

/// `T^{1/2} (log T)^{3/2} (log log T)^{1/2+ε}`, defined for `T > e`.
pub fn target_rate(t: f64, eps: f64) -> Result<f64> {
    if !(t > std::f64::consts::E) || !t.is_finite() {
        return Err(Error::arg(format!("target rate needs T > e, got {t}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::arg(format!("ε must be ≥ 0, got {eps}")));
    }
    let l = t.ln();
    Ok(t.sqrt() * l.powf(1.5) * l.ln().powf(0.5 + eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AlgInt;
    use crate::presets::builtin;
    use num_complex::Complex64;

    #[test]
    fn translate_zero_c_and_f_rejected() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let r = siegel_translate_stats(&k, &w, &RegionSpec::e(0.0, 3.0), &TranslateOptions::new(100, 1)).unwrap();
        assert_eq!((r.empirical_mean, r.empirical_variance), (0.0, 0.0));
        let f = RegionSpec::new(RegionKind::F, 1.0, 1.0);
        assert!(siegel_translate_stats(&k, &w, &f, &TranslateOptions::new(100, 1)).is_err());
        assert!(siegel_translate_stats(&k, &w, &RegionSpec::e(1.0, 1.0), &TranslateOptions::new(10, 1)).is_err());
    }

    #[test]
    fn translate_expectation_literal_rational() {
        // q = ±1..±20 each contribute 2c/|q|
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let h20: f64 = (1..=20).map(|q| 1.0 / q as f64).sum();
        let e = translate_expectation(&k, &w, 1.0, 3.0, 0.0).unwrap();
        assert!((e - 4.0 * h20).abs() < 1e-12);
        let pushed = translate_expectation(&k, &w, 1.0, 3.0, 7.0).unwrap();
        assert!((pushed - 12.0).abs() < 1e-2);
    }

    #[test]
    fn translate_mean_matches_model_expectation() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let r = siegel_translate_stats(&k, &w, &RegionSpec::e(1.0, 2.0), &TranslateOptions::new(800, 3)).unwrap();
        let e = r.translate_expectation.unwrap();
        assert!((r.empirical_mean - e).abs() < 4.0 * r.standard_error, "{r:?}");
    }

    #[test]
    fn overlap_examples() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let e = RegionSpec::e(1.0, 1.0);
        let one = overlap_volume(&k, &w, &e, &KElement::integral(AlgInt::new(vec![1])), 100_000, 2).unwrap();
        assert!((one.estimate - 4.0).abs() < 4.0 * one.std_error);
        let two = overlap_volume(&k, &w, &e, &KElement::integral(AlgInt::new(vec![2])), 100_000, 2).unwrap();
        assert_eq!(two.bound, 2.0);
        assert!(two.within_bound());
        // 1 ≤ |y| < e/2 and |x y| < c/4: volume c (1 − log 2)
        assert!((two.estimate - (1.0 - 2f64.ln())).abs() < 4.0 * two.std_error, "{two:?}");
        let zero = KElement::integral(AlgInt::new(vec![0]));
        assert!(overlap_volume(&k, &w, &e, &zero, 1000, 1).is_err());
    }

    #[test]
    fn sandwich_golden_ratio() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let spec = LatticeSpec::new(&k, Theta::from_values(&k, 1, 1, vec![Complex64::new(phi, 0.0)]).unwrap()).unwrap();
        let s = time_average_sandwich(&spec, &w, 1.0, 2.0, 10.0, 0.01).unwrap();
        assert!(s.holds(), "{s:?}");
        assert!(s.lower > 0 && s.upper > s.lower);
        let near = time_average_sandwich(&spec, &w, 1.0, 5.9, 6.0, 0.5).unwrap();
        assert!(near.holds(), "{near:?}");
        let zero = time_average_sandwich(&spec, &w, 0.0, 2.0, 10.0, 0.01).unwrap();
        assert_eq!((zero.lower, zero.middle, zero.upper), (0, 0.0, 0));
        assert!(time_average_sandwich(&spec, &w, 1.0, 10.0, 10.0, 0.01).is_err());
        assert!(time_average_sandwich(&spec, &w, 1.0, 2.0, 10.0, 0.5).is_err());
    }

    #[test]
    fn target_rate_shape() {
        let t = (std::f64::consts::E + 1.0).exp();
        let v = target_rate(t, 0.0).unwrap();
        let expect = ((std::f64::consts::E + 1.0) / 2.0).exp()
            * (std::f64::consts::E + 1.0).powf(1.5)
            * (std::f64::consts::E + 1.0).ln().sqrt();
        assert!((v - expect).abs() < 1e-9 * expect);
        assert!(target_rate(20.0, 0.0).unwrap() > target_rate(16.0, 0.0).unwrap());
        assert!(target_rate(t, 0.1).unwrap() > v);
        assert!(target_rate(2.0, 0.0).is_err());
    }
}
