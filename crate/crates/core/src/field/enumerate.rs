//! Enumeration of algebraic integers in boxes of `K_S`.

use num_complex::Complex64;

use super::{AlgInt, FieldHandle};
use crate::error::{Error, Result};

/// Default limit on the number of coefficient cells a single box scan may
/// visit.
pub const DEFAULT_CELL_CAP: u128 = 200_000_000;

const SLACK: f64 = 1e-9;

/// Inclusive integer ranges, one per basis coordinate.
pub(crate) type CoeffBox = Vec<(i64, i64)>;

pub(crate) fn box_cells(b: &CoeffBox) -> u128 {
    b.iter()
        .map(|&(lo, hi)| if hi < lo { 0 } else { (hi - lo + 1) as u128 })
        .fold(1u128, |acc, n| acc.saturating_mul(n))
}

/// Visits every integer point of the box in lexicographic order.
pub(crate) fn for_each_in_box(b: &CoeffBox, mut f: impl FnMut(&[i64])) {
    if b.iter().any(|&(lo, hi)| hi < lo) {
        return;
    }
    let mut cur: Vec<i64> = b.iter().map(|&(lo, _)| lo).collect();
    if cur.is_empty() {
        return;
    }
    loop {
        f(&cur);
        let mut k = cur.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < b[k].1 {
                cur[k] += 1;
                for (t, slot) in cur.iter_mut().enumerate().skip(k + 1) {
                    *slot = b[t].0;
                }
                break;
            }
        }
    }
}

impl FieldHandle {
    /// Coordinates of every element whose real place coordinates lie in the
    /// axis box `center ± radius` (layout as [`FieldHandle::real_coords`]).
    pub(crate) fn coefficient_box(&self, center: &[f64], radius: &[f64]) -> CoeffBox {
        let inv = self.real_inverse();
        (0..self.degree())
            .map(|i| {
                let mut mid = 0.0;
                let mut spread = 0.0;
                for k in 0..self.degree() {
                    mid += inv[(i, k)] * center[k];
                    spread += inv[(i, k)].abs() * radius[k];
                }
                let pad = SLACK * (mid.abs() + spread + 1.0);
                ((mid - spread - pad).ceil() as i64, (mid + spread + pad).floor() as i64)
            })
            .collect()
    }

    /// Real-coordinate radii bounding every element whose embedding has
    /// modulus below `r[ν]` at place `ν`.
    pub(crate) fn radii_from_place_bounds(&self, r: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree());
        for (p, &rv) in self.places().iter().zip(r) {
            out.push(rv);
            if !p.is_real() {
                out.push(rv);
            }
        }
        out
    }

    /// All `e ∈ O_K` with `max_ν |ι_ν(e)| ≤ house`, sorted by coordinates.
    pub fn enumerate_bounded_integers(&self, house: f64) -> Result<Vec<AlgInt>> {
        self.enumerate_bounded_integers_capped(house, DEFAULT_CELL_CAP)
    }

    pub fn enumerate_bounded_integers_capped(&self, house: f64, cap: u128) -> Result<Vec<AlgInt>> {
        if !(house >= 0.0) || !house.is_finite() {
            return Err(Error::arg(format!("house bound must be finite and ≥ 0, got {house}")));
        }
        let radius = vec![house; self.degree()];
        let center = vec![0.0; self.degree()];
        let b = self.coefficient_box(&center, &radius);
        let cells = box_cells(&b);
        if cells > cap {
            return Err(Error::ResourceCap {
                what: "integer enumeration box",
                needed: cells,
                cap,
            });
        }
        let limit = house + SLACK * house.max(1.0);
        let mut emb = vec![Complex64::new(0.0, 0.0); self.num_places()];
        let mut out = Vec::new();
        for_each_in_box(&b, |c| {
            self.embed_into(c, &mut emb);
            if emb.iter().all(|z| z.norm() <= limit) {
                out.push(AlgInt::new(c.to_vec()));
            }
        });
        Ok(out)
    }

    /// All units `ζ^j ∏ u_i^{k_i}` with house at most `house`, sorted by
    /// coordinates.
    pub fn enumerate_units(&self, house: f64) -> Vec<AlgInt> {
        if house < 1.0 - SLACK {
            return Vec::new();
        }
        let limit = house + SLACK * house.max(1.0);
        let torsion = self.torsion_units();
        let rank = self.unit_rank();
        let mut out = Vec::new();
        if rank == 0 {
            out = torsion;
        } else {
            // A unit of house ≤ H has every Log coordinate ≤ d_ν log H and the
            // coordinates sum to zero, so |Log_ν| ≤ deg·log H.
            let ell = self.degree() as f64 * house.ln().max(0.0);
            let lt_inv = self
                .unit_log_matrix()
                .transpose()
                .try_inverse()
                .expect("unit log matrix validated at build time");
            let bounds: CoeffBox = (0..rank)
                .map(|i| {
                    let s: f64 = (0..rank).map(|j| lt_inv[(i, j)].abs()).sum::<f64>() * ell;
                    let k = (s + 1e-6).floor() as i64;
                    (-k, k)
                })
                .collect();
            for_each_in_box(&bounds, |ks| {
                let mut u = self.one();
                for (i, &k) in ks.iter().enumerate() {
                    if k != 0 {
                        u = self.mul(&u, &self.unit_pow(i, k));
                    }
                }
                if self.house(&u) <= limit {
                    for t in &torsion {
                        out.push(self.mul(&u, t));
                    }
                }
            });
        }
        out.retain(|u| self.house(u) <= limit);
        out.sort();
        out.dedup();
        out
    }
}
