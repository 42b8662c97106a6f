//! Number fields `K`, their rings of integers and Archimedean places.
//!
//! Elements of `O_K` are exact integer coordinate vectors over a fixed
//! integral basis `e_0 = 1, e_1, …`; products go through the exact
//! multiplication table. Embeddings are `f64` and only used for geometry.

pub(crate) mod enumerate;
mod ideals;
pub mod poly;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::presets::{BasisConfig, FieldConfig};
use poly::Q128;

pub use enumerate::DEFAULT_CELL_CAP;
pub use ideals::PrincipalIdeal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceKind {
    Real,
    Complex,
}

#[derive(Clone, Debug)]
pub struct PlaceInfo {
    pub kind: PlaceKind,
    pub d_nu: usize,
    pub root: Complex64,
}

impl PlaceInfo {
    pub fn is_real(&self) -> bool {
        self.kind == PlaceKind::Real
    }
}

/// An algebraic integer as coordinates over the integral basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgInt {
    pub coords: Vec<i64>,
}

impl fmt::Debug for AlgInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl AlgInt {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn zero(degree: usize) -> Self {
        Self { coords: vec![0; degree] }
    }

    pub fn from_int(degree: usize, k: i64) -> Self {
        let mut coords = vec![0; degree];
        coords[0] = k;
        Self { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &AlgInt) -> AlgInt {
        AlgInt::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &AlgInt) -> AlgInt {
        AlgInt::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> AlgInt {
        AlgInt::new(self.coords.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> AlgInt {
        AlgInt::new(self.coords.iter().map(|a| a * k).collect())
    }
}

/// An element of `K`, written as an algebraic integer over a positive
/// rational integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KElement {
    pub num: AlgInt,
    pub den: i64,
}

impl KElement {
    pub fn integral(num: AlgInt) -> Self {
        Self { num, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

#[derive(Clone, Debug)]
pub struct FieldHandle {
    name: String,
    degree: usize,
    min_poly: Vec<i64>,
    places: Vec<PlaceInfo>,
    /// `mult[(i * deg + j) * deg + k]`: coefficient of `e_k` in `e_i e_j`.
    mult: Vec<i64>,
    power_coords: Vec<Vec<i64>>,
    denominators: Vec<i64>,
    fundamental_units: Vec<AlgInt>,
    unit_inverses: Vec<AlgInt>,
    torsion_order: u32,
    torsion_gen: AlgInt,
    /// `basis_emb[ν * deg + k]`: image of `e_k` at place `ν`.
    basis_emb: Vec<Complex64>,
    real_matrix: DMatrix<f64>,
    real_inverse: DMatrix<f64>,
    covolume: f64,
}

fn q(v: i64) -> Q128 {
    Q128::from_integer(v as i128)
}

/// Power-basis coordinates (rational) of basis element `k`.
fn basis_poly(power_coords: &[Vec<i64>], denominators: &[i64], k: usize) -> Vec<Q128> {
    power_coords[k]
        .iter()
        .map(|&c| Q128::new(c as i128, denominators[k] as i128))
        .collect()
}

impl FieldHandle {
    /// Builds and validates a field from its configuration.
    pub fn build(config: &FieldConfig) -> Result<FieldHandle> {
        let f = &config.min_poly;
        let deg = poly::degree(f);
        if f.len() < 2 {
            return Err(Error::InvalidField(format!("min_poly {f:?} has degree 0")));
        }
        if f[deg] != 1 {
            return Err(Error::InvalidField(format!(
                "min_poly {f:?} is not monic (leading coefficient {})",
                f[deg]
            )));
        }
        if poly::discriminant_resultant(f) == 0 {
            return Err(Error::InvalidField(format!("min_poly {f:?} has a repeated root")));
        }
        let (reals, complex) = poly::roots(f)?;
        if poly::has_integer_factor(&reals, &complex) {
            return Err(Error::InvalidField(format!("min_poly {f:?} is reducible over Q")));
        }

        let mut places: Vec<PlaceInfo> = reals
            .iter()
            .map(|&r| PlaceInfo {
                kind: PlaceKind::Real,
                d_nu: 1,
                root: Complex64::new(r, 0.0),
            })
            .collect();
        places.extend(complex.iter().map(|&z| PlaceInfo {
            kind: PlaceKind::Complex,
            d_nu: 2,
            root: z,
        }));
        for p in &places {
            let resid = poly::eval(f, p.root).norm();
            if resid >= 1e-10 * poly::scale(f, p.root) {
                return Err(Error::RootConvergence(format!(
                    "residual {resid:e} at root {} of {f:?}",
                    p.root
                )));
            }
        }

        let (power_coords, denominators, mult) = match &config.basis {
            BasisConfig::Power(tag) => {
                if tag != "power" {
                    return Err(Error::Preset(format!(
                        "basis must be \"power\" or an explicit table, got {tag:?}"
                    )));
                }
                let power_coords: Vec<Vec<i64>> = (0..deg)
                    .map(|k| (0..deg).map(|t| i64::from(t == k)).collect())
                    .collect();
                let denominators = vec![1; deg];
                let mut mult = vec![0i64; deg * deg * deg];
                for i in 0..deg {
                    for j in 0..deg {
                        let prod = poly::mul_mod(
                            &basis_poly(&power_coords, &denominators, i),
                            &basis_poly(&power_coords, &denominators, j),
                            f,
                        );
                        for (k, c) in prod.iter().enumerate() {
                            mult[(i * deg + j) * deg + k] = *c.numer() as i64;
                        }
                    }
                }
                (power_coords, denominators, mult)
            }
            BasisConfig::Explicit(b) => {
                let table = &b.mult_table;
                let shape_ok = table.len() == deg
                    && table.iter().all(|row| {
                        row.len() == deg && row.iter().all(|v| v.len() == deg)
                    })
                    && b.power_coords.len() == deg
                    && b.power_coords.iter().all(|v| v.len() == deg)
                    && b.denominators.len() == deg;
                if !shape_ok {
                    return Err(Error::InvalidField(format!(
                        "explicit basis for degree {deg} has inconsistent shapes"
                    )));
                }
                if b.denominators.iter().any(|&d| d <= 0) {
                    return Err(Error::InvalidField("basis denominators must be positive".into()));
                }
                let mut mult = vec![0i64; deg * deg * deg];
                for i in 0..deg {
                    for j in 0..deg {
                        for k in 0..deg {
                            mult[(i * deg + j) * deg + k] = table[i][j][k];
                        }
                    }
                }
                (b.power_coords.clone(), b.denominators.clone(), mult)
            }
        };
        Self::check_basis(f, deg, &power_coords, &denominators, &mult)?;

        let nplaces = places.len();
        let mut basis_emb = vec![Complex64::new(0.0, 0.0); nplaces * deg];
        for (v, p) in places.iter().enumerate() {
            for k in 0..deg {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut pow = Complex64::new(1.0, 0.0);
                for t in 0..deg {
                    acc += pow * power_coords[k][t] as f64;
                    pow *= p.root;
                }
                let mut val = acc / denominators[k] as f64;
                if p.is_real() {
                    val.im = 0.0;
                }
                basis_emb[v * deg + k] = val;
            }
        }

        let mut real_matrix = DMatrix::<f64>::zeros(deg, deg);
        let mut row = 0;
        for (v, p) in places.iter().enumerate() {
            for k in 0..deg {
                real_matrix[(row, k)] = basis_emb[v * deg + k].re;
                if !p.is_real() {
                    real_matrix[(row + 1, k)] = basis_emb[v * deg + k].im;
                }
            }
            row += p.d_nu;
        }
        let covolume = real_matrix.determinant().abs();
        let real_inverse = real_matrix.clone().try_inverse().ok_or_else(|| {
            Error::Singular(format!("real embedding matrix of {} is not invertible", config.name))
        })?;
        if !covolume.is_finite() || covolume < 1e-9 {
            return Err(Error::Singular(format!(
                "covolume {covolume:e} of {} signals a degenerate basis",
                config.name
            )));
        }

        let mut field = FieldHandle {
            name: config.name.clone(),
            degree: deg,
            min_poly: f.clone(),
            places,
            mult,
            power_coords,
            denominators,
            fundamental_units: Vec::new(),
            unit_inverses: Vec::new(),
            torsion_order: config.torsion.order,
            torsion_gen: AlgInt::new(config.torsion.gen.clone()),
            basis_emb,
            real_matrix,
            real_inverse,
            covolume,
        };
        field.install_units(config)?;
        Ok(field)
    }

    /// Checks `e_0 = 1` and that the table agrees with multiplication of the
    /// basis polynomials modulo the minimal polynomial.
    fn check_basis(
        f: &[i64],
        deg: usize,
        power_coords: &[Vec<i64>],
        denominators: &[i64],
        mult: &[i64],
    ) -> Result<()> {
        let one: Vec<Q128> = (0..deg).map(|t| q(i64::from(t == 0))).collect();
        if basis_poly(power_coords, denominators, 0) != one {
            return Err(Error::InvalidField("basis element e_0 must be 1".into()));
        }
        let pc = IntMatrix::from_rows(
            &power_coords
                .iter()
                .map(|r| r.iter().map(|&c| c as i128).collect())
                .collect::<Vec<_>>(),
        );
        if pc.det() == 0 {
            return Err(Error::InvalidField("basis elements are linearly dependent".into()));
        }
        for i in 0..deg {
            for j in 0..deg {
                let lhs = poly::mul_mod(
                    &basis_poly(power_coords, denominators, i),
                    &basis_poly(power_coords, denominators, j),
                    f,
                );
                let mut rhs = vec![q(0); deg];
                for k in 0..deg {
                    let c = mult[(i * deg + j) * deg + k];
                    for (t, val) in basis_poly(power_coords, denominators, k).iter().enumerate() {
                        rhs[t] += q(c) * *val;
                    }
                }
                if lhs != rhs {
                    return Err(Error::InvalidField(format!(
                        "multiplication table entry e_{i}·e_{j} disagrees with min_poly {f:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn install_units(&mut self, config: &FieldConfig) -> Result<()> {
        let deg = self.degree;
        let check_len = |v: &Vec<i64>, what: &str| {
            if v.len() != deg {
                Err(Error::InvalidField(format!(
                    "{what} has {} coordinates, field degree is {deg}",
                    v.len()
                )))
            } else {
                Ok(())
            }
        };
        check_len(&config.torsion.gen, "torsion generator")?;
        for u in &config.fundamental_units {
            check_len(u, "fundamental unit")?;
        }

        let one = self.one();
        if self.torsion_order == 0 {
            return Err(Error::InvalidField("torsion order must be positive".into()));
        }
        let mut pow = one.clone();
        for k in 1..=self.torsion_order {
            pow = self.mul(&pow, &self.torsion_gen);
            if pow == one && k < self.torsion_order {
                return Err(Error::InvalidField(format!(
                    "torsion generator has order {k}, not {}",
                    self.torsion_order
                )));
            }
        }
        if pow != one {
            return Err(Error::InvalidField(format!(
                "torsion generator raised to {} is not 1",
                self.torsion_order
            )));
        }

        let rank = self.places.len() - 1;
        if config.fundamental_units.len() != rank {
            return Err(Error::InvalidField(format!(
                "{} fundamental units given, unit rank is {rank}",
                config.fundamental_units.len()
            )));
        }
        let mut units = Vec::new();
        let mut inverses = Vec::new();
        for coords in &config.fundamental_units {
            let u = AlgInt::new(coords.clone());
            let inv = self.unit_inverse(&u)?;
            units.push(u);
            inverses.push(inv);
        }
        self.fundamental_units = units;
        self.unit_inverses = inverses;
        if rank > 0 {
            let m = self.unit_log_matrix();
            let det = m.determinant();
            if det.abs() < 1e-9 {
                return Err(Error::InvalidField(format!(
                    "fundamental units are multiplicatively dependent (regulator {det:e})"
                )));
            }
        }
        Ok(())
    }

    /// Rows are `Log(u_i)` restricted to the first `rank` places.
    fn unit_log_matrix(&self) -> DMatrix<f64> {
        let rank = self.fundamental_units.len();
        let mut m = DMatrix::<f64>::zeros(rank, rank);
        for (i, u) in self.fundamental_units.iter().enumerate() {
            let l = self.log_embedding(u);
            for j in 0..rank {
                m[(i, j)] = l[j];
            }
        }
        m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn min_poly(&self) -> &[i64] {
        &self.min_poly
    }

    pub fn places(&self) -> &[PlaceInfo] {
        &self.places
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn d_nu(&self) -> Vec<usize> {
        self.places.iter().map(|p| p.d_nu).collect()
    }

    /// `(r1, r2)`.
    pub fn signature(&self) -> (usize, usize) {
        let r1 = self.places.iter().filter(|p| p.is_real()).count();
        (r1, self.places.len() - r1)
    }

    pub fn unit_rank(&self) -> usize {
        self.fundamental_units.len()
    }

    pub fn fundamental_units(&self) -> &[AlgInt] {
        &self.fundamental_units
    }

    pub fn torsion_order(&self) -> u32 {
        self.torsion_order
    }

    pub fn torsion_gen(&self) -> &AlgInt {
        &self.torsion_gen
    }

    /// Coefficient of `e_k` in `e_i e_j`.
    pub fn mult_entry(&self, i: usize, j: usize, k: usize) -> i64 {
        self.mult[(i * self.degree + j) * self.degree + k]
    }

    /// Basis element `k` in the power basis: numerators and denominator.
    pub fn basis_power_coords(&self, k: usize) -> (&[i64], i64) {
        (&self.power_coords[k], self.denominators[k])
    }

    pub fn basis_embedding(&self, place: usize, k: usize) -> Complex64 {
        self.basis_emb[place * self.degree + k]
    }

    /// Real coordinates of the basis images: rows are place coordinates
    /// (`Re`, plus `Im` for complex places), columns basis elements.
    pub fn real_matrix(&self) -> &DMatrix<f64> {
        &self.real_matrix
    }

    pub fn real_inverse(&self) -> &DMatrix<f64> {
        &self.real_inverse
    }

    /// `V_0`: Lebesgue covolume of `ι_S(O_K)` in `K_S ≅ R^deg`.
    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    pub fn one(&self) -> AlgInt {
        AlgInt::from_int(self.degree, 1)
    }

    pub fn zero(&self) -> AlgInt {
        AlgInt::zero(self.degree)
    }

    pub fn element(&self, coords: &[i64]) -> Result<AlgInt> {
        if coords.len() != self.degree {
            return Err(Error::arg(format!(
                "element has {} coordinates, field {} has degree {}",
                coords.len(),
                self.name,
                self.degree
            )));
        }
        Ok(AlgInt::new(coords.to_vec()))
    }

    pub fn mul(&self, a: &AlgInt, b: &AlgInt) -> AlgInt {
        let deg = self.degree;
        let mut acc = vec![0i128; deg];
        for (i, &x) in a.coords.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coords.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let xy = x as i128 * y as i128;
                let base = (i * deg + j) * deg;
                for (k, slot) in acc.iter_mut().enumerate() {
                    let t = self.mult[base + k];
                    if t != 0 {
                        *slot += xy * t as i128;
                    }
                }
            }
        }
        AlgInt::new(
            acc.into_iter()
                .map(|v| i64::try_from(v).expect("algebraic integer coordinate overflow"))
                .collect(),
        )
    }

    pub fn pow(&self, a: &AlgInt, k: u32) -> AlgInt {
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// Matrix of multiplication by `a`: column `k` holds the coordinates of
    /// `a·e_k`.
    pub fn mult_matrix(&self, a: &AlgInt) -> IntMatrix {
        let deg = self.degree;
        let mut m = IntMatrix::zeros(deg, deg);
        for k in 0..deg {
            let mut e = self.zero();
            e.coords[k] = 1;
            let prod = self.mul(a, &e);
            for (r, v) in prod.coords.iter().enumerate() {
                m.set(r, k, *v as i128);
            }
        }
        m
    }

    /// Exact field norm `N_{K/Q}(a)` (signed).
    pub fn norm_exact(&self, a: &AlgInt) -> i128 {
        self.mult_matrix(a).det()
    }

    /// `b / a` if it lies in `O_K`.
    pub fn exact_quotient(&self, b: &AlgInt, a: &AlgInt) -> Option<AlgInt> {
        if a.is_zero() {
            return None;
        }
        let m = self.mult_matrix(a);
        let det = m.det();
        let rhs: Vec<i128> = b.coords.iter().map(|&c| c as i128).collect();
        let sol = m.adjugate().mul_vec(&rhs);
        let mut coords = Vec::with_capacity(self.degree);
        for v in sol {
            if v % det != 0 {
                return None;
            }
            coords.push(i64::try_from(v / det).ok()?);
        }
        Some(AlgInt::new(coords))
    }

    pub fn divides(&self, a: &AlgInt, b: &AlgInt) -> bool {
        self.exact_quotient(b, a).is_some()
    }

    /// Inverse of a unit, computed exactly.
    pub fn unit_inverse(&self, u: &AlgInt) -> Result<AlgInt> {
        let n = self.norm_exact(u);
        if n.abs() != 1 {
            return Err(Error::NotAUnit { norm: n.abs() as f64 });
        }
        self.exact_quotient(&self.one(), u)
            .ok_or(Error::NotAUnit { norm: n.abs() as f64 })
    }

    /// `u^k` for a unit and any integer exponent.
    pub fn unit_pow(&self, index: usize, k: i64) -> AlgInt {
        let base = if k >= 0 {
            &self.fundamental_units[index]
        } else {
            &self.unit_inverses[index]
        };
        self.pow(base, k.unsigned_abs() as u32)
    }

    /// `(ι_ν(a))_ν`.
    pub fn embed(&self, a: &AlgInt) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.places.len()];
        self.embed_into(&a.coords, &mut out);
        out
    }

    pub(crate) fn embed_into(&self, coords: &[i64], out: &mut [Complex64]) {
        let deg = self.degree;
        for (v, slot) in out.iter_mut().enumerate() {
            let row = &self.basis_emb[v * deg..(v + 1) * deg];
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, e) in coords.iter().zip(row) {
                if *c != 0 {
                    acc += e * (*c as f64);
                }
            }
            *slot = acc;
        }
    }

    pub fn embed_k(&self, x: &KElement) -> Vec<Complex64> {
        let d = x.den as f64;
        self.embed(&x.num).into_iter().map(|z| z / d).collect()
    }

    /// `N(c) = ∏_ν |ι_ν(c)|^{d_ν}`; zero for `c = 0`.
    pub fn field_norm(&self, a: &AlgInt) -> f64 {
        self.norm_of_embedding(&self.embed(a))
    }

    pub fn field_norm_k(&self, x: &KElement) -> f64 {
        self.norm_of_embedding(&self.embed_k(x))
    }

    pub fn norm_of_embedding(&self, emb: &[Complex64]) -> f64 {
        emb.iter()
            .zip(&self.places)
            .map(|(z, p)| z.norm().powi(p.d_nu as i32))
            .product()
    }

    /// Largest absolute value over all places.
    pub fn house(&self, a: &AlgInt) -> f64 {
        self.embed(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(d_ν log |ι_ν(a)|)_ν` without any unit check.
    pub fn log_embedding(&self, a: &AlgInt) -> Vec<f64> {
        self.embed(a)
            .iter()
            .zip(&self.places)
            .map(|(z, p)| p.d_nu as f64 * z.norm().ln())
            .collect()
    }

    /// The Log map on units; rejects elements whose norm is not `±1`.
    pub fn log_unit(&self, u: &AlgInt) -> Result<Vec<f64>> {
        let norm = self.field_norm(u);
        if (norm - 1.0).abs() > crate::EMBED_TOL {
            return Err(Error::NotAUnit { norm });
        }
        Ok(self.log_embedding(u))
    }

    /// Splits an embedding vector into real coordinates: one per real
    /// place, `(Re, Im)` per complex place.
    pub fn real_coords(&self, emb: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree);
        for (z, p) in emb.iter().zip(&self.places) {
            out.push(z.re);
            if !p.is_real() {
                out.push(z.im);
            }
        }
        out
    }

    /// Every unit `ζ^k` of finite order.
    pub fn torsion_units(&self) -> Vec<AlgInt> {
        let mut out = Vec::with_capacity(self.torsion_order as usize);
        let mut cur = self.one();
        for _ in 0..self.torsion_order {
            out.push(cur.clone());
            cur = self.mul(&cur, &self.torsion_gen);
        }
        out
    }
}
