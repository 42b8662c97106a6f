//! Lattices `Λ_ϑ ⊂ K_S^d`, the diagonal flow `g_t`, point enumeration and
//! covolumes of the lattices `Φ(D)`.

use num_complex::Complex64;
use rand::Rng;

use crate::diophantine::{quasi_norm, ApproximateRecord, RegionKind, RegionSpec, WeightScheme};
use crate::error::{Error, Result};
use crate::field::enumerate::{box_cells, for_each_in_box};
use crate::field::{AlgInt, FieldHandle, DEFAULT_CELL_CAP};
use crate::spiralling;

/// A point of `K_S^d`: `d` rows of per-place complex values, stored
/// row-major as `entries[row * places + ν]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KSVec {
    pub entries: Vec<Complex64>,
    pub places: usize,
}

impl KSVec {
    pub fn zeros(d: usize, places: usize) -> Self {
        Self {
            entries: vec![Complex64::new(0.0, 0.0); d * places],
            places,
        }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let places = rows.first().map_or(0, Vec::len);
        Self {
            entries: rows.concat(),
            places,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len() / self.places.max(1)
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.entries[r * self.places..(r + 1) * self.places]
    }

    /// First `m` rows.
    pub fn x_block(&self, m: usize) -> &[Complex64] {
        &self.entries[..m * self.places]
    }

    /// Rows after the first `m`.
    pub fn y_block(&self, m: usize) -> &[Complex64] {
        &self.entries[m * self.places..]
    }

    /// Multiplies every coordinate by the per-place scalars `s[ν]`.
    pub fn scale_places(&self, s: &[Complex64]) -> KSVec {
        let p = self.places;
        KSVec {
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(k, z)| z * s[k % p])
                .collect(),
            places: p,
        }
    }
}

/// The matrix `ϑ ∈ Mat_{m×n}(K_S)`, stored as `values[(i * n + j) * places + ν]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Theta {
    pub m: usize,
    pub n: usize,
    pub places: usize,
    pub values: Vec<Complex64>,
}

impl Theta {
    pub fn zero(field: &FieldHandle, m: usize, n: usize) -> Self {
        let places = field.num_places();
        Self {
            m,
            n,
            places,
            values: vec![Complex64::new(0.0, 0.0); m * n * places],
        }
    }

    pub fn from_values(field: &FieldHandle, m: usize, n: usize, values: Vec<Complex64>) -> Result<Self> {
        let places = field.num_places();
        if values.len() != m * n * places {
            return Err(Error::arg(format!(
                "theta needs {} per-place values ({m}×{n} entries × {places} places), got {}",
                m * n * places,
                values.len()
            )));
        }
        for (k, z) in values.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::arg("theta entries must be finite"));
            }
            if field.places()[k % places].is_real() && z.im.abs() >= 1e-12 {
                return Err(Error::arg(format!(
                    "theta value {z} sits at a real place but has an imaginary part"
                )));
            }
        }
        Ok(Self { m, n, places, values })
    }

    /// Entry `(i, j)` given by rational coordinates over the integral basis.
    pub fn from_basis_coords(field: &FieldHandle, m: usize, n: usize, coords: &[f64]) -> Result<Self> {
        let deg = field.degree();
        if coords.len() != m * n * deg {
            return Err(Error::arg(format!(
                "theta needs {} basis coordinates, got {}",
                m * n * deg,
                coords.len()
            )));
        }
        let places = field.num_places();
        let mut values = Vec::with_capacity(m * n * places);
        for e in 0..m * n {
            for v in 0..places {
                let mut z = Complex64::new(0.0, 0.0);
                for k in 0..deg {
                    z += field.basis_embedding(v, k) * coords[e * deg + k];
                }
                values.push(z);
            }
        }
        Ok(Self { m, n, places, values })
    }

    /// Uniform draw from the torus `Mat_{m×n}(K_S) / ι_S(O_K)^{mn}`:
    /// basis coordinates uniform in `[0, 1)`.
    pub fn random<R: Rng + ?Sized>(field: &FieldHandle, m: usize, n: usize, rng: &mut R) -> Self {
        let coords: Vec<f64> = (0..m * n * field.degree()).map(|_| rng.random::<f64>()).collect();
        Self::from_basis_coords(field, m, n, &coords).expect("shape fixed above")
    }

    pub fn get(&self, i: usize, j: usize, v: usize) -> Complex64 {
        self.values[(i * self.n + j) * self.places + v]
    }
}

/// `Λ_ϑ = {(ι(p) + ϑι(q), ι(q))}` for a field and `ϑ`.
#[derive(Clone, Debug)]
pub struct LatticeSpec<'f> {
    pub field: &'f FieldHandle,
    pub m: usize,
    pub n: usize,
    pub theta: Theta,
}

impl<'f> LatticeSpec<'f> {
    pub fn new(field: &'f FieldHandle, theta: Theta) -> Result<Self> {
        if theta.m == 0 || theta.n == 0 {
            return Err(Error::arg("m and n must be positive"));
        }
        if theta.places != field.num_places() {
            return Err(Error::arg("theta was built for a different field"));
        }
        Ok(Self {
            field,
            m: theta.m,
            n: theta.n,
            theta,
        })
    }

    pub fn standard(field: &'f FieldHandle, m: usize, n: usize) -> Result<Self> {
        Self::new(field, Theta::zero(field, m, n))
    }

    pub fn d(&self) -> usize {
        self.m + self.n
    }

    /// `(ϑ ι(q))_{iν}` for embedded `q` rows.
    pub(crate) fn theta_times(&self, q_emb: &[Complex64], out: &mut [Complex64]) {
        let p = self.field.num_places();
        for i in 0..self.m {
            for v in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..self.n {
                    acc += self.theta.get(i, j, v) * q_emb[j * p + v];
                }
                out[i * p + v] = acc;
            }
        }
    }
}

/// `(ι(p) + ϑ ι(q), ι(q))`.
pub fn lattice_point(spec: &LatticeSpec, p: &[AlgInt], q: &[AlgInt]) -> Result<KSVec> {
    if p.len() != spec.m || q.len() != spec.n {
        return Err(Error::arg(format!(
            "expected {} p and {} q entries, got {} and {}",
            spec.m,
            spec.n,
            p.len(),
            q.len()
        )));
    }
    let places = spec.field.num_places();
    let q_emb: Vec<Complex64> = q.iter().flat_map(|e| spec.field.embed(e)).collect();
    let mut x = vec![Complex64::new(0.0, 0.0); spec.m * places];
    spec.theta_times(&q_emb, &mut x);
    for (i, e) in p.iter().enumerate() {
        for (v, z) in spec.field.embed(e).into_iter().enumerate() {
            x[i * places + v] += z;
        }
    }
    x.extend(q_emb);
    Ok(KSVec { entries: x, places })
}

#[derive(Clone, Debug)]
pub struct FlowParams {
    pub weights: WeightScheme,
    pub t: f64,
}

/// `g_t = diag(e^{a_{iν} t}, e^{-b_{jν} t})` applied per place.
pub fn apply_flow(flow: &FlowParams, v: &KSVec) -> Result<KSVec> {
    let w = &flow.weights;
    if v.places != w.places() || v.dim() != w.m + w.n {
        return Err(Error::arg("weight scheme does not match the vector shape"));
    }
    Ok(flow_unchecked(w, flow.t, v))
}

pub(crate) fn flow_unchecked(w: &WeightScheme, t: f64, v: &KSVec) -> KSVec {
    let p = v.places;
    let split = w.m * p;
    let entries = v
        .entries
        .iter()
        .enumerate()
        .map(|(k, z)| {
            if k < split {
                z * (w.a[k] * t).exp()
            } else {
                z * (-w.b[k - split] * t).exp()
            }
        })
        .collect();
    KSVec { entries, places: p }
}

/// Determinant of the per-place block of `g_t` as a `K_ν`-linear map:
/// `exp(t (Σ_i a_{iν} − Σ_j b_{jν}))`. Only the product over places weighted
/// by `d_ν` is forced to be 1.
pub fn per_place_determinant(weights: &WeightScheme, t: f64) -> Vec<f64> {
    let p = weights.places();
    (0..p)
        .map(|v| {
            let sa: f64 = (0..weights.m).map(|i| weights.a[i * p + v]).sum();
            let sb: f64 = (0..weights.n).map(|j| weights.b[j * p + v]).sum();
            (t * (sa - sb)).exp()
        })
        .collect()
}

/// Both routes to the covolume of `Φ(D)` for `D = (1, p/q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhiCovolume {
    /// `N(q)^d` from the embedded norm.
    pub formula: u128,
    /// `[O_K : {x : (p/q)x ∈ O_K}]^d` from Smith normal forms.
    pub smith: Option<u128>,
}

/// Covolume of `Φ(D)`; with `verify` the Smith-form index is computed too
/// and a disagreement is an error.
pub fn phi_covolume(field: &FieldHandle, d: u32, p: &AlgInt, q: &AlgInt, verify: bool) -> Result<PhiCovolume> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::arg("p and q must be nonzero"));
    }
    if !field.coprime(p, q) {
        return Err(Error::NotCoprime(format!("({:?}) and ({:?}) share a factor", p, q)));
    }
    let nq = field.field_norm(q).round() as u128;
    let formula = nq.pow(d);
    let smith = if verify {
        // x ↦ p x mod qO_K has kernel {x : (p/q)x ∈ O_K}; its index is
        // [O_K : qO_K] / [O_K : pO_K + qO_K].
        let q_index = field
            .mult_matrix(q)
            .column_span_index()
            .ok_or_else(|| Error::Singular("multiplication by q is singular".into()))?;
        let sum_index = field.ideal_sum_index(p, q).expect("p, q nonzero");
        let kernel_index = q_index / sum_index;
        let s = kernel_index.pow(d);
        if s != formula {
            return Err(Error::Mismatch(format!(
                "N(q)^d = {formula} but Smith index^d = {s} for p={p:?}, q={q:?}"
            )));
        }
        Some(s)
    } else {
        None
    };
    Ok(PhiCovolume { formula, smith })
}

const SLACK: f64 = 1e-9;

/// Candidate `q ∈ O_K^n` with embeddings and `‖q‖_b`.
#[derive(Clone, Debug)]
pub struct QCandidate {
    pub coords: Vec<i64>,
    pub emb: Vec<Complex64>,
    pub size: f64,
}

/// Streams every nonzero `q ∈ O_K^n` with `‖q‖_b` in the log-shell
/// `[lo, hi)` (padded by a relative slack; exact membership is decided by the
/// caller).
pub(crate) fn for_each_q(
    field: &FieldHandle,
    weights: &WeightScheme,
    lo: f64,
    hi: f64,
    cap: u128,
    mut f: impl FnMut(&[i64], &[Complex64], f64),
) -> Result<()> {
    let deg = field.degree();
    let places = field.num_places();
    let n = weights.n;
    let size_lo = lo.exp() * (1.0 - SLACK);
    let size_hi = hi.exp() * (1.0 + SLACK);
    let mut boxes = Vec::with_capacity(n);
    let mut cells = 1u128;
    for j in 0..n {
        let radii: Vec<f64> = (0..places)
            .map(|v| (hi * weights.b[j * places + v]).exp() * (1.0 + SLACK))
            .collect();
        let real = field.radii_from_place_bounds(&radii);
        let b = field.coefficient_box(&vec![0.0; deg], &real);
        cells = cells.saturating_mul(box_cells(&b));
        boxes.push((b, radii));
    }
    if cells > cap {
        return Err(Error::ResourceCap {
            what: "q enumeration box",
            needed: cells,
            cap,
        });
    }
    // components 1..n are materialised, component 0 is streamed
    let mut lists: Vec<Vec<(Vec<i64>, Vec<Complex64>)>> = Vec::new();
    for (b, radii) in boxes.iter().skip(1) {
        let mut list = Vec::new();
        let mut emb = vec![Complex64::new(0.0, 0.0); places];
        for_each_in_box(b, |c| {
            field.embed_into(c, &mut emb);
            if emb.iter().zip(radii).all(|(z, r)| z.norm() < *r) {
                list.push((c.to_vec(), emb.clone()));
            }
        });
        lists.push(list);
    }
    let (b0, radii0) = &boxes[0];
    let mut coords = vec![0i64; n * deg];
    let mut emb = vec![Complex64::new(0.0, 0.0); n * places];
    let mut idx = vec![0usize; n.saturating_sub(1)];
    for_each_in_box(b0, |c| {
        field.embed_into(c, &mut emb[..places]);
        if !emb[..places].iter().zip(radii0).all(|(z, r)| z.norm() < *r) {
            return;
        }
        coords[..deg].copy_from_slice(c);
        if lists.iter().any(Vec::is_empty) {
            return;
        }
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            for (j, &k) in idx.iter().enumerate() {
                let (qc, qe) = &lists[j][k];
                coords[(j + 1) * deg..(j + 2) * deg].copy_from_slice(qc);
                emb[(j + 1) * places..(j + 2) * places].copy_from_slice(qe);
            }
            if coords.iter().any(|&x| x != 0) {
                let size = quasi_norm(&emb, &weights.b);
                if size >= size_lo && size < size_hi {
                    f(&coords, &emb, size);
                }
            }
            // advance the odometer over the materialised components
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if idx[k] + 1 < lists[k].len() {
                    idx[k] += 1;
                    for slot in idx.iter_mut().skip(k + 1) {
                        *slot = 0;
                    }
                    break;
                }
            }
        }
    });
    Ok(())
}

/// Precomputed `q`-shell, reused across many `ϑ`.
#[derive(Clone, Debug)]
pub struct QList {
    pub lo: f64,
    pub hi: f64,
    pub items: Vec<QCandidate>,
}

impl QList {
    pub fn build(field: &FieldHandle, weights: &WeightScheme, lo: f64, hi: f64) -> Result<QList> {
        let mut items = Vec::new();
        for_each_q(field, weights, lo, hi, DEFAULT_CELL_CAP, |c, e, s| {
            items.push(QCandidate {
                coords: c.to_vec(),
                emb: e.to_vec(),
                size: s,
            })
        })?;
        Ok(QList { lo, hi, items })
    }
}

/// Enumerates the points `v ∈ Λ_ϑ` with `g_s v` in a region, reporting them
/// as Diophantine records `(p, q)` with `x = ϑq − p`.
pub struct Enumerator<'a, 'f> {
    spec: &'a LatticeSpec<'f>,
    weights: &'a WeightScheme,
    region: &'a RegionSpec,
    flow_time: f64,
    cap: u128,
}

impl<'a, 'f> Enumerator<'a, 'f> {
    pub fn new(spec: &'a LatticeSpec<'f>, weights: &'a WeightScheme, region: &'a RegionSpec) -> Result<Self> {
        weights.check_shape(spec.field, spec.m, spec.n)?;
        region.validate()?;
        if matches!(region.kind, RegionKind::F) {
            return Err(Error::Unbounded(
                "F_{T,c} contains the slab q = 0 with infinitely many lattice points".into(),
            ));
        }
        Ok(Self {
            spec,
            weights,
            region,
            flow_time: 0.0,
            cap: DEFAULT_CELL_CAP,
        })
    }

    /// Counts `v` with `g_s v` in the region instead of `v` itself.
    pub fn with_flow_time(mut self, s: f64) -> Self {
        self.flow_time = s;
        self
    }

    pub fn with_cell_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    /// Log-shell of `‖q‖_b` that can meet the region.
    pub fn q_shell(&self) -> (f64, f64) {
        (self.flow_time, self.flow_time + self.region.t)
    }

    pub fn run(&self) -> Result<Vec<ApproximateRecord>> {
        let mut out = Vec::new();
        if self.region.c <= 0.0 {
            return Ok(out);
        }
        let (lo, hi) = self.q_shell();
        let mut scratch = Scratch::new(self.spec);
        for_each_q(self.spec.field, self.weights, lo, hi, self.cap, |c, e, s| {
            self.visit(c, e, s, &mut scratch, &mut |r| out.push(r));
        })?;
        sort_records(self.spec.field, &mut out);
        Ok(out)
    }

    /// Same as [`Enumerator::run`] but over a precomputed `q`-shell.
    pub fn run_with(&self, qlist: &QList) -> Result<Vec<ApproximateRecord>> {
        let (lo, hi) = self.q_shell();
        if qlist.lo > lo + 1e-12 || qlist.hi < hi - 1e-12 {
            return Err(Error::arg("precomputed q-shell does not cover the region"));
        }
        let mut out = Vec::new();
        if self.region.c <= 0.0 {
            return Ok(out);
        }
        let mut scratch = Scratch::new(self.spec);
        for q in &qlist.items {
            self.visit(&q.coords, &q.emb, q.size, &mut scratch, &mut |r| out.push(r));
        }
        sort_records(self.spec.field, &mut out);
        Ok(out)
    }

    /// Number of points only, without materialising records.
    pub fn count_with(&self, qlist: &QList) -> Result<u64> {
        let (lo, hi) = self.q_shell();
        if qlist.lo > lo + 1e-12 || qlist.hi < hi - 1e-12 {
            return Err(Error::arg("precomputed q-shell does not cover the region"));
        }
        if self.region.c <= 0.0 {
            return Ok(0);
        }
        let mut scratch = Scratch::new(self.spec);
        let mut count = 0u64;
        for q in &qlist.items {
            self.visit(&q.coords, &q.emb, q.size, &mut scratch, &mut |_| count += 1);
        }
        Ok(count)
    }

    fn visit(
        &self,
        q_coords: &[i64],
        q_emb: &[Complex64],
        q_size: f64,
        sc: &mut Scratch,
        emit: &mut dyn FnMut(ApproximateRecord),
    ) {
        let field = self.spec.field;
        let deg = field.degree();
        let places = field.num_places();
        let m = self.spec.m;
        let rho = self.region.c / q_size;
        self.spec.theta_times(q_emb, &mut sc.center);

        // candidate p_i per row, filtered row by row
        for i in 0..m {
            sc.rows[i].clear();
            let center = &sc.center[i * places..(i + 1) * places];
            let radii: Vec<f64> = (0..places)
                .map(|v| rho.powf(self.weights.a[i * places + v]) * (1.0 + SLACK))
                .collect();
            let c_real = field.real_coords(center);
            let r_real = field.radii_from_place_bounds(&radii);
            let b = field.coefficient_box(&c_real, &r_real);
            let row = &mut sc.rows[i];
            let emb = &mut sc.emb;
            for_each_in_box(&b, |c| {
                field.embed_into(c, emb);
                if emb
                    .iter()
                    .zip(center)
                    .zip(&radii)
                    .all(|((z, w), r)| (w - z).norm() < *r)
                {
                    row.push((c.to_vec(), emb.clone()));
                }
            });
            if row.is_empty() {
                return;
            }
        }

        let mut idx = vec![0usize; m];
        loop {
            let mut entries = Vec::with_capacity((m + self.spec.n) * places);
            for (i, &k) in idx.iter().enumerate() {
                let (_, pe) = &sc.rows[i][k];
                for v in 0..places {
                    entries.push(sc.center[i * places + v] - pe[v]);
                }
            }
            entries.extend_from_slice(q_emb);
            let point = KSVec { entries, places };
            let inside = if self.flow_time == 0.0 {
                self.region.contains(self.weights, &point)
            } else {
                self.region
                    .contains(self.weights, &flow_unchecked(self.weights, self.flow_time, &point))
            };
            if inside {
                let p: Vec<AlgInt> = idx
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| AlgInt::new(sc.rows[i][k].0.clone()))
                    .collect();
                let q: Vec<AlgInt> = q_coords.chunks(deg).map(|c| AlgInt::new(c.to_vec())).collect();
                let x_size = quasi_norm(point.x_block(m), &self.weights.a);
                let directions = match &self.region.kind {
                    RegionKind::EAB { .. } => Some(spiralling::directions(self.weights, &point)),
                    _ => None,
                };
                emit(ApproximateRecord {
                    p,
                    q,
                    value: x_size * q_size,
                    q_size,
                    point,
                    directions,
                });
            }
            let mut k = m;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if idx[k] + 1 < sc.rows[k].len() {
                    idx[k] += 1;
                    for slot in idx.iter_mut().skip(k + 1) {
                        *slot = 0;
                    }
                    break;
                }
            }
        }
    }
}

struct Scratch {
    center: Vec<Complex64>,
    emb: Vec<Complex64>,
    rows: Vec<Vec<(Vec<i64>, Vec<Complex64>)>>,
}

impl Scratch {
    fn new(spec: &LatticeSpec) -> Self {
        let places = spec.field.num_places();
        Self {
            center: vec![Complex64::new(0.0, 0.0); spec.m * places],
            emb: vec![Complex64::new(0.0, 0.0); places],
            rows: vec![Vec::new(); spec.m],
        }
    }
}

/// Order: `q` by house, then `q` coordinates, then `p` coordinates.
fn sort_records(field: &FieldHandle, records: &mut [ApproximateRecord]) {
    let house = |r: &ApproximateRecord| {
        r.q.iter().map(|e| field.house(e)).fold(0.0, f64::max)
    };
    let mut keyed: Vec<(f64, usize)> = records.iter().enumerate().map(|(k, r)| (house(r), k)).collect();
    keyed.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| records[a.1].q.cmp(&records[b.1].q))
            .then_with(|| records[a.1].p.cmp(&records[b.1].p))
    });
    let order: Vec<usize> = keyed.into_iter().map(|(_, k)| k).collect();
    let sorted: Vec<ApproximateRecord> = order.iter().map(|&k| records[k].clone()).collect();
    records.clone_from_slice(&sorted);
}

/// A point of `Λ_ϑ` found by enumeration: Diophantine `(p, q)` and the
/// lattice vector `(ϑq − p, q)`.
#[derive(Clone, Debug)]
pub struct LatticeHit {
    pub p: Vec<AlgInt>,
    pub q: Vec<AlgInt>,
    pub point: KSVec,
}

/// All points of `Λ_ϑ` in the region, each once, in deterministic order.
pub fn enumerate_lattice_points(
    spec: &LatticeSpec,
    weights: &WeightScheme,
    region: &RegionSpec,
) -> Result<Vec<LatticeHit>> {
    Ok(Enumerator::new(spec, weights, region)?
        .run()?
        .into_iter()
        .map(|r| LatticeHit {
            p: r.p,
            q: r.q,
            point: r.point,
        })
        .collect())
}
