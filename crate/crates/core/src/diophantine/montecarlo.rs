//! Monte Carlo λ-volumes of bounded subsets of `E_{T,c}`.
//!
//! Every `y` with `‖y‖_b > 0` is uniquely `D_u y0` with `D_u = diag(e^{b u})`
//! and `y0` in the annulus `A = {e^{-1} ≤ ‖y0‖_b < 1}` for a whole interval of
//! `u` of length one, so
//!
//! ```text
//! ∫ h(y) dy = ∫_R du ∫_A h(D_u y0) e^u dy0 .
//! ```
//!
//! The proposal draws `u` uniform on `[0, T + 1)`, `y0` uniform in the unit
//! box around `A`, and `x` uniform in the box enclosing `{‖x‖_a < c/‖y‖_b}`.
//! The weight `e^u · c/‖y‖_b = c/‖y0‖_b` stays bounded, so the variance
//! does not grow with `T`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{quasi_norm, RegionKind, RegionSpec, WeightScheme};
use crate::error::{Error, Result};
use crate::field::FieldHandle;
use crate::lattice::KSVec;
use crate::rng;

/// Samples per independent RNG stream.
pub const MC_CHUNK: usize = 65_536;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// `λ(region)` for `E` and `E_{T,c}(A,B)`; `F` has infinite volume.
pub fn mc_volume(
    field: &FieldHandle,
    weights: &WeightScheme,
    region: &RegionSpec,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    region.validate()?;
    if matches!(region.kind, RegionKind::F) {
        return Err(Error::Unbounded(
            "F_{T,c} has infinite volume near y = 0".into(),
        ));
    }
    mc_integrate(field, weights, region.c, region.t, samples, seed, |pt| {
        region.contains(weights, pt)
    })
}

/// `λ` of `{v ∈ E_{T,c} : pred(v)}`, with `pred` evaluated on proposals
/// that cover `E_{T,c}`.
pub fn mc_integrate(
    field: &FieldHandle,
    weights: &WeightScheme,
    c: f64,
    t: f64,
    samples: usize,
    seed: u64,
    pred: impl Fn(&KSVec) -> bool + Sync,
) -> Result<McEstimate> {
    if samples < 1000 {
        return Err(Error::arg(format!("need at least 1000 samples, got {samples}")));
    }
    weights.check_shape(field, weights.m, weights.n)?;
    if c == 0.0 {
        return Ok(McEstimate {
            estimate: 0.0,
            std_error: 0.0,
            samples,
        });
    }
    let places = field.num_places();
    let real: Vec<bool> = field.places().iter().map(|p| p.is_real()).collect();
    let (m, n) = (weights.m, weights.n);
    let deg = field.degree() as i32;
    let box_y = 2f64.powi(n as i32 * deg);
    let box_x_unit = 2f64.powi(m as i32 * deg);
    let u_len = t + 1.0;
    let norm = field.covolume().powi((m + n) as i32);
    let scale = u_len * box_y * box_x_unit * c / norm;

    let chunks = samples.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut r = rng::stream(seed, chunk as u64);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            let mut y0 = vec![Complex64::new(0.0, 0.0); n * places];
            let mut entries = vec![Complex64::new(0.0, 0.0); (m + n) * places];
            for _ in 0..count {
                let u: f64 = r.random::<f64>() * u_len;
                for (k, z) in y0.iter_mut().enumerate() {
                    let re = 2.0 * r.random::<f64>() - 1.0;
                    let im = if real[k % places] { 0.0 } else { 2.0 * r.random::<f64>() - 1.0 };
                    *z = Complex64::new(re, im);
                }
                let y0_size = quasi_norm(&y0, &weights.b);
                // x radius from the flowed y; drawn even when rejected so the
                // stream layout is fixed
                let mut y_size = 0.0;
                for (k, z) in y0.iter().enumerate() {
                    let y = z * (weights.b[k] * u).exp();
                    entries[m * places + k] = y;
                    y_size = f64::max(y_size, y.norm_sqr().powf(0.5 / weights.b[k]));
                }
                let rho = if y_size > 0.0 { c / y_size } else { 0.0 };
                for k in 0..m * places {
                    let r_k = rho.powf(weights.a[k]);
                    let re = (2.0 * r.random::<f64>() - 1.0) * r_k;
                    let im = if real[k % places] { 0.0 } else { (2.0 * r.random::<f64>() - 1.0) * r_k };
                    entries[k] = Complex64::new(re, im);
                }
                let in_annulus = y0_size < 1.0 && y0_size >= (-1.0f64).exp();
                let w = if in_annulus {
                    let pt = KSVec {
                        entries: entries.clone(),
                        places,
                    };
                    if pred(&pt) {
                        scale / y0_size
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = samples as f64;
    let mean = s / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / nf).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::analytic_volume_e;
    use crate::presets::builtin;

    #[test]
    fn rational_volume() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let est = mc_volume(&k, &w, &RegionSpec::e(1.0, 1.0), 200_000, 1).unwrap();
        assert!((est.estimate - 4.0).abs() < 4.0 * est.std_error, "{est:?}");
        assert!(est.std_error < 0.02);
    }

    #[test]
    fn degenerate_and_invalid() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        assert_eq!(mc_volume(&k, &w, &RegionSpec::e(0.0, 1.0), 1000, 1).unwrap().estimate, 0.0);
        assert!(mc_volume(&k, &w, &RegionSpec::e(1.0, 1.0), 10, 1).is_err());
        let f = RegionSpec::new(RegionKind::F, 1.0, 1.0);
        assert!(matches!(mc_volume(&k, &w, &f, 1000, 1), Err(Error::Unbounded(_))));
    }

    #[test]
    fn independent_of_chunking_order() {
        let k = builtin("Qi").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let a = mc_volume(&k, &w, &RegionSpec::e(1.0, 1.0), 150_000, 9).unwrap();
        let b = mc_volume(&k, &w, &RegionSpec::e(1.0, 1.0), 150_000, 9).unwrap();
        assert_eq!(a, b);
        let exact = analytic_volume_e(&k, &w, 1.0, 1.0);
        assert!((a.estimate - exact).abs() < 4.0 * a.std_error);
    }
}
