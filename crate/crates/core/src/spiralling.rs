//! Weighted projections onto spheres and directional counting in
//! `E_{T,c}(A, B)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::diophantine::{analytic_volume_e, McEstimate, RegionSpec, WeightScheme};
use crate::error::{Error, Result};
use crate::field::FieldHandle;
use crate::lattice::{Enumerator, KSVec, LatticeSpec};
use crate::rng;

/// A point of the unit sphere in real coordinates: one per real entry, two
/// (`Re`, `Im`) per complex entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpherePoint {
    pub coords: Vec<f64>,
}

/// `π_a(x)` (absent for `x = 0`) and `π_b(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Directions {
    pub x: Option<SpherePoint>,
    pub y: SpherePoint,
}

/// The unique point `(e^{t w_k} x_k)_k` on the unit sphere.
pub fn project_weighted(block: &[Complex64], weights: &[f64], real: &[bool]) -> Result<SpherePoint> {
    if block.len() != weights.len() || !block.len().is_multiple_of(real.len().max(1)) {
        return Err(Error::arg("block, weights and place flags disagree in shape"));
    }
    let s: f64 = block.iter().map(|z| z.norm_sqr()).sum();
    if s == 0.0 {
        return Err(Error::arg("cannot project the zero block"));
    }
    let w_min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let phi = |t: f64| -> f64 {
        block
            .iter()
            .zip(weights)
            .map(|(z, w)| (2.0 * t * w).exp() * z.norm_sqr())
            .sum::<f64>()
            - 1.0
    };
    // φ is increasing; φ(0) = S − 1 and the other end of the bracket has the
    // opposite sign by comparing every exponent with the smallest weight.
    let edge = -s.ln() / (2.0 * w_min);
    let (mut lo, mut hi) = if s > 1.0 { (edge, 0.0) } else { (0.0, edge) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * (1.0 + lo.abs()) {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..4 {
        let d: f64 = block
            .iter()
            .zip(weights)
            .map(|(z, w)| 2.0 * w * (2.0 * t * w).exp() * z.norm_sqr())
            .sum();
        let step = phi(t) / d;
        if !step.is_finite() {
            break;
        }
        t -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let places = real.len();
    let mut coords = Vec::new();
    for (k, (z, w)) in block.iter().zip(weights).enumerate() {
        let v = z * (t * w).exp();
        coords.push(v.re);
        if !real[k % places] {
            coords.push(v.im);
        }
    }
    Ok(SpherePoint { coords })
}

/// Directions of the two blocks of a point of `K_S^{m+n}`.
pub fn directions(weights: &WeightScheme, point: &KSVec) -> Directions {
    let real: Vec<bool> = weights.d_nu.iter().map(|&d| d == 1).collect();
    let x = project_weighted(point.x_block(weights.m), &weights.a, &real).ok();
    let y = project_weighted(point.y_block(weights.m), &weights.b, &real)
        .expect("points of E_{T,c} have y ≠ 0");
    Directions { x, y }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CapSpec {
    Full,
    /// `{p : ⟨p, center⟩ > cos(radius)}`.
    Cap { center: Vec<f64>, radius: f64 },
    Complement(Box<CapSpec>),
}

impl CapSpec {
    pub fn cap(center: Vec<f64>, radius: f64) -> Result<CapSpec> {
        if !(radius > 0.0 && radius < PI) {
            return Err(Error::arg(format!("cap radius must lie in (0, π), got {radius}")));
        }
        let len = center.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::arg("cap center must be a nonzero finite vector"));
        }
        Ok(CapSpec::Cap {
            center: center.iter().map(|x| x / len).collect(),
            radius,
        })
    }

    /// Half-sphere `±x_k > 0` in a sphere of ambient dimension `dim`
    /// (`k` is 1-based).
    pub fn hemisphere(dim: usize, k: usize, positive: bool) -> Result<CapSpec> {
        if k == 0 || k > dim {
            return Err(Error::arg(format!("hemisphere axis {k} outside 1..={dim}")));
        }
        let mut center = vec![0.0; dim];
        center[k - 1] = if positive { 1.0 } else { -1.0 };
        Self::cap(center, PI / 2.0)
    }

    /// `"full"` or `"hemisphere:+k"` / `"hemisphere:-k"`.
    pub fn parse(text: &str, dim: usize) -> Result<CapSpec> {
        let t = text.trim();
        if t == "full" {
            return Ok(CapSpec::Full);
        }
        if let Some(rest) = t.strip_prefix("hemisphere:") {
            let (positive, digits) = match rest.chars().next() {
                Some('+') => (true, &rest[1..]),
                Some('-') => (false, &rest[1..]),
                _ => (true, rest),
            };
            let k: usize = digits
                .parse()
                .map_err(|_| Error::arg(format!("bad hemisphere axis in {text:?}")))?;
            return Self::hemisphere(dim, k, positive);
        }
        Err(Error::arg(format!(
            "cap {text:?} must be \"full\" or \"hemisphere:±k\""
        )))
    }

    pub fn complement(self) -> CapSpec {
        match self {
            CapSpec::Complement(inner) => *inner,
            other => CapSpec::Complement(Box::new(other)),
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            CapSpec::Full => Ok(()),
            CapSpec::Cap { center, .. } if center.len() == dim => Ok(()),
            CapSpec::Cap { center, .. } => Err(Error::arg(format!(
                "cap center has {} coordinates, sphere lives in R^{dim}",
                center.len()
            ))),
            CapSpec::Complement(inner) => inner.check_dim(dim),
        }
    }

    pub fn contains(&self, p: &SpherePoint) -> bool {
        self.contains_direction(Some(p))
    }

    /// Membership of a direction; an undefined direction (`x = 0`) lies
    /// only in the full sphere and in complements of proper caps.
    pub fn contains_direction(&self, p: Option<&SpherePoint>) -> bool {
        match self {
            CapSpec::Full => true,
            CapSpec::Cap { center, radius } => match p {
                Some(p) => {
                    let dot: f64 = center.iter().zip(&p.coords).map(|(a, b)| a * b).sum();
                    dot > radius.cos()
                }
                None => false,
            },
            CapSpec::Complement(inner) => !inner.contains_direction(p),
        }
    }

    /// Normalised surface measure where a closed form is known: full
    /// sphere, hemispheres, and caps on `S^0`, `S^1`, `S^2`.
    pub fn exact_measure(&self, dim: usize) -> Option<f64> {
        match self {
            CapSpec::Full => Some(1.0),
            CapSpec::Complement(inner) => inner.exact_measure(dim).map(|v| 1.0 - v),
            CapSpec::Cap { radius, .. } => {
                if (radius - PI / 2.0).abs() < 1e-15 {
                    return Some(0.5);
                }
                match dim {
                    1 => Some(0.5),
                    2 => Some(radius / PI),
                    3 => Some((1.0 - radius.cos()) / 2.0),
                    _ => None,
                }
            }
        }
    }
}

/// Uniform point on the unit sphere of `R^dim`.
pub fn random_sphere_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SpherePoint {
    if dim == 1 {
        return SpherePoint {
            coords: vec![if rng.random::<bool>() { 1.0 } else { -1.0 }],
        };
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-300 {
            return SpherePoint {
                coords: v.iter().map(|x| x / len).collect(),
            };
        }
    }
}

/// Monte Carlo normalised measure of a cap; the full sphere is exact.
pub fn cap_volume(cap: &CapSpec, dim: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 1000 {
        return Err(Error::arg(format!("need at least 1000 samples, got {samples}")));
    }
    cap.check_dim(dim)?;
    if *cap == CapSpec::Full {
        return Ok(McEstimate {
            estimate: 1.0,
            std_error: 0.0,
            samples,
        });
    }
    let mut r = rng::stream(seed, 0);
    let hits = (0..samples)
        .filter(|_| cap.contains(&random_sphere_point(dim, &mut r)))
        .count();
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Exact measure when known, else a Monte Carlo estimate.
pub fn cap_measure(cap: &CapSpec, dim: usize, samples: usize, seed: u64) -> Result<f64> {
    cap.check_dim(dim)?;
    match cap.exact_measure(dim) {
        Some(v) => Ok(v),
        None => Ok(cap_volume(cap, dim, samples, seed)?.estimate),
    }
}

/// `#(E_{T,c}(A,B) ∩ Λ_ϑ)`.
pub fn count_directional(
    spec: &LatticeSpec,
    weights: &WeightScheme,
    c: f64,
    t: f64,
    a: &CapSpec,
    b: &CapSpec,
) -> Result<u64> {
    let deg = spec.field.degree();
    a.check_dim(spec.m * deg)?;
    b.check_dim(spec.n * deg)?;
    let region = RegionSpec::eab(c, t, a.clone(), b.clone());
    Ok(Enumerator::new(spec, weights, &region)?.run()?.len() as u64)
}

/// `λ(E_{T,c}) vol(A) vol(B)`.
#[allow(clippy::too_many_arguments)]
pub fn analytic_volume_ab(
    field: &FieldHandle,
    weights: &WeightScheme,
    c: f64,
    t: f64,
    a: &CapSpec,
    b: &CapSpec,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let deg = field.degree();
    let va = cap_measure(a, weights.m * deg, samples, seed)?;
    let vb = cap_measure(b, weights.n * deg, samples, seed.wrapping_add(1))?;
    Ok(analytic_volume_e(field, weights, c, t) * va * vb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::count_approximates;
    use crate::lattice::Theta;
    use crate::presets::builtin;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projection_examples() {
        let p = project_weighted(&[c(-3.0)], &[1.0], &[true]).unwrap();
        assert!((p.coords[0] + 1.0).abs() < 1e-12);
        let p = project_weighted(&[c(3.0), c(4.0)], &[0.5, 0.5], &[true]).unwrap();
        assert!((p.coords[0] - 0.6).abs() < 1e-12 && (p.coords[1] - 0.8).abs() < 1e-12);
        let p = project_weighted(&[c(1.0), c(1.0)], &[0.75, 0.25], &[true]).unwrap();
        let u: f64 = 0.682_327_803_828_019_3; // u^3 + u = 1
        assert!((p.coords[0] - u.powf(1.5)).abs() < 1e-10);
        assert!((p.coords[1] - u.sqrt()).abs() < 1e-10);
        assert!(project_weighted(&[c(0.0)], &[1.0], &[true]).is_err());
    }

    #[test]
    fn exact_cap_measures() {
        assert_eq!(CapSpec::Full.exact_measure(5), Some(1.0));
        let h = CapSpec::hemisphere(2, 1, true).unwrap();
        assert_eq!(h.exact_measure(2), Some(0.5));
        let cap = CapSpec::cap(vec![0.0, 0.0, 1.0], PI / 3.0).unwrap();
        assert!((cap.exact_measure(3).unwrap() - 0.25).abs() < 1e-15);
        let est = cap_volume(&cap, 3, 100_000, 5).unwrap();
        assert!((est.estimate - 0.25).abs() < 3.0 * est.std_error + 1e-12);
        let est = cap_volume(&h, 2, 100_000, 6).unwrap();
        assert!((est.estimate - 0.5).abs() < 3.0 * est.std_error);
        assert_eq!(cap_volume(&CapSpec::Full, 4, 1000, 1).unwrap().estimate, 1.0);
    }

    #[test]
    fn parsing() {
        assert_eq!(CapSpec::parse("full", 3).unwrap(), CapSpec::Full);
        let h = CapSpec::parse("hemisphere:-2", 2).unwrap();
        assert!(h.contains(&SpherePoint { coords: vec![0.0, -1.0] }));
        assert!(CapSpec::parse("hemisphere:+3", 2).is_err());
        assert!(CapSpec::parse("ball", 2).is_err());
    }

    #[test]
    fn directional_examples() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let spec = LatticeSpec::new(&k, Theta::from_values(&k, 1, 1, vec![c(1.61803)]).unwrap()).unwrap();
        let t = 2f64.ln();
        let full = count_directional(&spec, &w, 1.0, t, &CapSpec::Full, &CapSpec::Full).unwrap();
        assert_eq!(full, count_approximates(&spec, &w, 1.0, t).unwrap());
        let plus = CapSpec::hemisphere(1, 1, true).unwrap();
        assert_eq!(count_directional(&spec, &w, 1.0, t, &plus, &plus).unwrap(), 1);
        let vol = analytic_volume_ab(&k, &w, 1.0, 1.0, &plus, &CapSpec::Full, 1000, 1).unwrap();
        assert!((vol - 2.0).abs() < 1e-12);
        let both = analytic_volume_ab(&k, &w, 1.0, 1.0, &plus, &plus, 1000, 1).unwrap();
        assert!((both - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_and_complement_partition_counts() {
        let k = builtin("Q").unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        for spec in [
            LatticeSpec::standard(&k, 1, 1).unwrap(),
            LatticeSpec::new(&k, Theta::from_values(&k, 1, 1, vec![c(0.3819)]).unwrap()).unwrap(),
        ] {
            let total = count_approximates(&spec, &w, 1.0, 4.0).unwrap();
            let a = CapSpec::hemisphere(1, 1, true).unwrap();
            let inside = count_directional(&spec, &w, 1.0, 4.0, &a, &CapSpec::Full).unwrap();
            let outside = count_directional(&spec, &w, 1.0, 4.0, &a.clone().complement(), &CapSpec::Full).unwrap();
            assert_eq!(inside + outside, total);
        }
    }
}
