//! Principal ideals of `O_K`: enumeration by norm, counting, truncated zeta
//! sums and coprimality.

use num_complex::Complex64;
use num_integer::Integer;

use super::enumerate::{box_cells, for_each_in_box, DEFAULT_CELL_CAP};
use super::{AlgInt, FieldHandle};
use crate::error::{Error, Result};
use crate::intmat::IntMatrix;

/// A nonzero principal ideal with its canonical generator: the
/// lexicographically smallest associate among those of house at most the
/// search bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalIdeal {
    pub generator: AlgInt,
    pub norm: u64,
}

impl FieldHandle {
    /// Every principal ideal of norm at most `s` has a generator of house at
    /// most this bound: reduce `Log(α)` into the fundamental parallelepiped
    /// spanned by the `Log(u_i)` on top of the balanced point.
    pub fn generator_house_bound(&self, s: f64) -> f64 {
        let logs: Vec<Vec<f64>> = self
            .fundamental_units()
            .iter()
            .map(|u| self.log_embedding(u))
            .collect();
        let excess = self
            .places()
            .iter()
            .enumerate()
            .map(|(v, p)| logs.iter().map(|l| l[v].max(0.0)).sum::<f64>() / p.d_nu as f64)
            .fold(0.0, f64::max);
        s.powf(1.0 / self.degree() as f64) * excess.exp()
    }

    /// Principal ideals of norm at most `s`, sorted by norm then generator.
    pub fn principal_ideals(&self, s: f64) -> Result<Vec<PrincipalIdeal>> {
        self.principal_ideals_capped(s, DEFAULT_CELL_CAP)
    }

    pub fn principal_ideals_capped(&self, s: f64, cap: u128) -> Result<Vec<PrincipalIdeal>> {
        if !(s >= 1.0) || !s.is_finite() {
            return Err(Error::arg(format!("ideal norm bound must be finite and ≥ 1, got {s}")));
        }
        let bound = self.generator_house_bound(s);
        let limit = bound * (1.0 + 1e-9);
        let b = self.coefficient_box(&vec![0.0; self.degree()], &vec![limit; self.degree()]);
        let cells = box_cells(&b);
        if cells > cap {
            return Err(Error::ResourceCap {
                what: "principal ideal search box",
                needed: cells,
                cap,
            });
        }
        // Any associate u·α inside the search box has house(u) ≤ limit^deg.
        let units = self.enumerate_units(limit.powi(self.degree() as i32) * (1.0 + 1e-9));
        let unit_emb: Vec<Vec<Complex64>> = units.iter().map(|u| self.embed(u)).collect();
        let s_floor = (s * (1.0 + 1e-12)).floor() as i128;

        let mut emb = vec![Complex64::new(0.0, 0.0); self.num_places()];
        let mut out = Vec::new();
        for_each_in_box(&b, |c| {
            if c.iter().all(|&x| x == 0) {
                return;
            }
            self.embed_into(c, &mut emb);
            if emb.iter().any(|z| z.norm() > limit) {
                return;
            }
            let approx = self.norm_of_embedding(&emb);
            if approx > s * (1.0 + 1e-6) + 1.0 {
                return;
            }
            let alpha = AlgInt::new(c.to_vec());
            let norm = self.norm_exact(&alpha).abs();
            if norm > s_floor {
                return;
            }
            for (u, ue) in units.iter().zip(&unit_emb) {
                let fits = emb.iter().zip(ue).all(|(a, b)| (a * b).norm() <= limit);
                if fits {
                    let beta = self.mul(u, &alpha);
                    if beta < alpha {
                        return;
                    }
                }
            }
            out.push(PrincipalIdeal {
                generator: alpha,
                norm: norm as u64,
            });
        });
        out.sort_by(|x, y| x.norm.cmp(&y.norm).then_with(|| x.generator.cmp(&y.generator)));
        Ok(out)
    }

    /// Number of nonzero principal ideals of norm at most `s`.
    pub fn count_principal_ideals(&self, s: f64) -> Result<u64> {
        Ok(self.principal_ideals(s)?.len() as u64)
    }

    /// `Σ N(α)^{-s}` over principal ideals of norm at most `cap`.
    pub fn zeta_partial(&self, s: f64, cap: u64) -> Result<f64> {
        if !(s > 1.0) {
            return Err(Error::arg(format!("zeta exponent must exceed 1, got {s}")));
        }
        if cap == 0 {
            return Err(Error::arg("ideal norm cap must be ≥ 1"));
        }
        Ok(zeta_sum(&self.principal_ideals(cap as f64)?, s))
    }

    /// Index of the ideal `(a) + (b)` in `O_K`, or `None` if both are zero.
    pub fn ideal_sum_index(&self, a: &AlgInt, b: &AlgInt) -> Option<u128> {
        let deg = self.degree();
        let ma = self.mult_matrix(a);
        let mb = self.mult_matrix(b);
        let mut m = IntMatrix::zeros(deg, 2 * deg);
        for r in 0..deg {
            for c in 0..deg {
                m.set(r, c, ma.get(r, c));
                m.set(r, deg + c, mb.get(r, c));
            }
        }
        m.column_span_index()
    }

    /// `(a) + (b) = O_K`.
    pub fn coprime(&self, a: &AlgInt, b: &AlgInt) -> bool {
        let na = self.norm_exact(a).abs();
        let nb = self.norm_exact(b).abs();
        if na != 0 && nb != 0 && na.gcd(&nb) == 1 {
            return true;
        }
        self.ideal_sum_index(a, b) == Some(1)
    }
}

/// `Σ N^{-s}` over an ideal list, in list order.
pub fn zeta_sum(ideals: &[PrincipalIdeal], s: f64) -> f64 {
    ideals.iter().map(|i| (i.norm as f64).powf(-s)).sum()
}
