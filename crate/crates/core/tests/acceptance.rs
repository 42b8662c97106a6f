//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if
//! any criterion fails. Seeds are fixed constants.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use nfapprox::diophantine::{
    analytic_volume_e, count_approximates, error_series, fit_scaling_exponent, mc_volume,
};
use nfapprox::lattice::phi_covolume;
use nfapprox::moments::{
    partition_count, second_moment_stats, siegel_translate_stats, target_rate, time_average_sandwich,
    translate_expectation, unit_cube_sum, z_count, z_count_in_box, knessl_keller_ratio, TranslateOptions,
};
use nfapprox::presets::{builtin, builtin_names};
use nfapprox::spiralling::{count_directional, CapSpec};
use nfapprox::{LatticeSpec, RegionSpec, Theta, WeightScheme};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn covolume_lemma() -> Outcome {
    let mut pairs = 0;
    for name in ["Q", "Qi"] {
        let k = builtin(name).unwrap();
        // residues mod q have house below 2|q| ≤ 2√20, so these p cover
        // every class
        let ps = k.enumerate_bounded_integers(9.0).unwrap();
        let qs = k.enumerate_bounded_integers(20f64.sqrt() + 0.01).unwrap();
        for q in qs.iter().filter(|q| !q.is_zero() && k.norm_exact(q).abs() <= 20) {
            for p in ps.iter().filter(|p| !p.is_zero() && k.coprime(p, q)) {
                for d in [2, 3] {
                    match phi_covolume(&k, d, p, q, true) {
                        Ok(r) if Some(r.formula) == r.smith => pairs += 1,
                        other => return outcome(false, format!("{name} p={p:?} q={q:?} d={d}: {other:?}")),
                    }
                }
            }
        }
    }
    outcome(pairs > 0, format!("{pairs} (p, q, d) triples agree exactly"))
}

fn volume_linearity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    let mut runs = 0;
    for (fi, name) in builtin_names().into_iter().enumerate() {
        let k = builtin(name).unwrap();
        let p = k.num_places();
        let mut r = nfapprox::rng::stream(2002, fi as u64);
        for s in 0..10 {
            let m = r.random_range(1..=2usize);
            let n = if m == 2 { 1 } else { r.random_range(1..=2usize) };
            let a: Vec<f64> = (0..m * p).map(|_| r.random_range(0.1..1.0)).collect();
            let b: Vec<f64> = (0..n * p).map(|_| r.random_range(0.1..1.0)).collect();
            let w = WeightScheme::normalized(&k, m, n, &a, &b).unwrap();
            let c = r.random_range(0.25..2.0);
            let t = r.random_range(0.5..3.0);
            let exact = analytic_volume_e(&k, &w, c, t);
            let est = mc_volume(&k, &w, &RegionSpec::e(c, t), 1_000_000, 9000 + 10 * fi as u64 + s).unwrap();
            let z = (est.estimate - exact).abs() / est.std_error;
            worst = worst.max(z);
            runs += 1;
            if z > 3.0 {
                fails.push(format!("{name}#{s} z={z:.2}"));
            }
        }
    }
    outcome(
        fails.is_empty(),
        format!("{runs} schemes, max |z| = {worst:.2}; outside 3σ: {fails:?}"),
    )
}

/// Push time for the translate model: counts `g_s Λ_ϑ`, whose `q`-shell
/// `[e^s, e^{s+T})` makes the lattice sum over `q` match the volume.
const PUSH: f64 = 7.0;

fn translate_siegel() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for name in ["Q", "Qi", "Qsqrt2"] {
        let k = builtin(name).unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        for t in [1.0, 3.0] {
            let opts = TranslateOptions::new(2000, 31).with_push(PUSH);
            let r = siegel_translate_stats(&k, &w, &RegionSpec::e(1.0, t), &opts).unwrap();
            let literal = translate_expectation(&k, &w, 1.0, t, 0.0).unwrap();
            let ok = r.z_score() <= 3.0;
            pass &= ok;
            lines.push(format!(
                "{name} T={t}: mean {:.4} vs λ {:.4} (z {:.2}); unpushed expectation {:.4}",
                r.empirical_mean,
                r.reference_value,
                r.z_score(),
                literal
            ));
        }
    }
    outcome(pass, lines.join("; "))
}

fn second_moment() -> Outcome {
    let k = builtin("Q").unwrap();
    let w = WeightScheme::equal(&k, 1, 1);
    let mut ratios = Vec::new();
    for t in [3.0, 6.0, 12.0] {
        let r = second_moment_stats(&k, &w, &RegionSpec::e(1.0, t), &TranslateOptions::new(1000, 41)).unwrap();
        ratios.push((t, r.variance_ratio()));
    }
    let pass = ratios.iter().all(|&(_, q)| q > 0.0 && q < 10.0);
    outcome(pass, format!("variance/volume by T: {ratios:.3?}"))
}

fn error_scaling() -> Outcome {
    let k = builtin("Q").unwrap();
    let w = WeightScheme::equal(&k, 1, 1);
    let grid: Vec<f64> = (0..=20).map(|i| 5.0 + 0.5 * i as f64).collect();
    let mut slopes = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for seed in 0..10u64 {
        let mut r = nfapprox::rng::stream(500 + seed, 0);
        let spec = LatticeSpec::new(&k, Theta::random(&k, 1, 1, &mut r)).unwrap();
        let series = error_series(&spec, &w, 1.0, &grid).unwrap();
        for p in &series {
            max_ratio = max_ratio.max(p.error.abs() / target_rate(p.t, 0.01).unwrap());
        }
        let pts: Vec<(f64, f64)> = series.iter().map(|p| (p.t, p.error)).collect();
        match fit_scaling_exponent(&pts, 5.0, 0.01) {
            Ok(fit) => slopes.push(fit.slope),
            Err(_) => slopes.push(f64::NEG_INFINITY),
        }
    }
    let good = slopes.iter().filter(|&&s| s <= 0.7).count();
    outcome(
        good >= 8 && max_ratio <= 10.0,
        format!("slopes {slopes:.2?}; {good}/10 ≤ 0.7; max |error|/rate = {max_ratio:.3}"),
    )
}

fn spiralling_product() -> Outcome {
    let k = builtin("Q").unwrap();
    let w = WeightScheme::equal(&k, 1, 1);
    let a = CapSpec::hemisphere(1, 1, true).unwrap();
    let b = CapSpec::hemisphere(1, 1, true).unwrap();
    let target = 0.25;
    let (mut total, mut inside) = (0u64, 0u64);
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = nfapprox::rng::stream(600 + seed, 0);
        let spec = LatticeSpec::new(&k, Theta::random(&k, 1, 1, &mut r)).unwrap();
        let n = count_approximates(&spec, &w, 1.0, 12.0).unwrap();
        let ab = count_directional(&spec, &w, 1.0, 12.0, &a, &b).unwrap();
        let se = (target * (1.0 - target) / n as f64).sqrt();
        let z = (ab as f64 / n as f64 - target).abs() / se;
        worst = worst.max(z);
        if z > 3.0 {
            bad.push(format!("seed {seed}: {ab}/{n} (z {z:.2})"));
        }
        total += n;
        inside += ab;
    }
    let pooled = (inside as f64 / total as f64 - target).abs() / (target * (1.0 - target) / total as f64).sqrt();
    outcome(
        bad.is_empty(),
        format!("per-seed max z {worst:.2}, outside 3σ {bad:?}; pooled {inside}/{total} z {pooled:.2}"),
    )
}

fn combinatorics() -> Outcome {
    for k in 1..=6 {
        for m in 0..=40 {
            if partition_count(k, m) != common::partitions_listed(k, m) {
                return outcome(false, format!("p({k}, {m}) disagrees with listing"));
            }
        }
    }
    for n in 1..=3usize {
        for w in 0..=10u64 {
            let mut total = 0u64;
            for m in 0..=n as u64 * w {
                for neg in 0..=n as u64 * w {
                    total += z_count_in_box(n, m, neg, w);
                }
            }
            if total != (2 * w + 1).pow(n as u32) {
                return outcome(false, format!("box identity fails at n={n}, W={w}"));
            }
        }
    }
    let ratio = knessl_keller_ratio(3, 200);
    let z_examples = z_count(2, 1, 1) == 2 && z_count(2, 2, 0) == 3;
    outcome(
        (ratio - 1.0).abs() <= 0.25 && z_examples,
        format!("partitions and box identity exact; Knessl–Keller ratio at (3, 200) = {ratio:.4}"),
    )
}

fn ideal_counting() -> Outcome {
    let k = builtin("Qi").unwrap();
    let ideals = k.principal_ideals(1e5).unwrap();
    let count_at = |s: f64| ideals.iter().filter(|i| i.norm as f64 <= s).count() as f64;
    let density = count_at(1e5) / 1e5;
    let rel = (density / (PI / 4.0) - 1.0).abs();
    let pts: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64 * 1e3, count_at(i as f64 * 1e3))).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    outcome(
        rel < 0.01 && r2 > 0.9999,
        format!("count(1e5)/1e5 = {density:.6} (π/4 off by {:.4}%), r² = {r2:.8}", rel * 100.0),
    )
}

fn unit_cube() -> Outcome {
    let k = builtin("Qsqrt2").unwrap();
    let sums: Vec<_> = (0..4).map(|l| unit_cube_sum(&k, l as f64, 60).unwrap()).collect();
    let values: Vec<f64> = sums.iter().map(|s| s.value).collect();
    let tails = sums.iter().map(|s| s.tail_bound).fold(0.0, f64::max);
    let spread = values.iter().cloned().fold(0.0, f64::max) / values.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        spread < 3.0 && tails < 1e-6 && values.iter().all(|v| v.is_finite()),
        format!("sums for log Nγ = 0..3: {values:.4?}; max/min = {spread:.3}; max tail {tails:.1e}"),
    )
}

fn sandwich() -> Outcome {
    let mut bad = Vec::new();
    let mut r = nfapprox::rng::stream(1010, 0);
    for i in 0..20 {
        let name = if i % 2 == 0 { "Q" } else { "Qsqrt2" };
        let k = builtin(name).unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let spec = LatticeSpec::new(&k, Theta::random(&k, 1, 1, &mut r)).unwrap();
        let rr = r.random_range(1.2..3.0);
        let t = rr + r.random_range(0.5..5.0);
        let dt = rr / 10.0 * r.random_range(0.1..1.0);
        let s = time_average_sandwich(&spec, &w, 1.0, rr, t, dt).unwrap();
        if !s.holds() {
            bad.push(format!("{name} R={rr:.3} T={t:.3}: {s:?}"));
        }
    }
    outcome(bad.is_empty(), format!("20 instances; violations {bad:?}"))
}

fn brute_force() -> Outcome {
    let mut checked = 0;
    for (fi, name) in builtin_names().into_iter().enumerate() {
        let k = builtin(name).unwrap();
        let w = WeightScheme::equal(&k, 1, 1);
        let mut r = nfapprox::rng::stream(1111, fi as u64);
        for _ in 0..10 {
            let theta = Theta::random(&k, 1, 1, &mut r);
            let spec = LatticeSpec::new(&k, theta.clone()).unwrap();
            let c = r.random_range(0.25..2.0);
            let t = r.random_range(0.1..20f64.ln());
            let ours = count_approximates(&spec, &w, c, t).unwrap();
            let naive = common::naive_count(&k, &theta, &w, c, t);
            if ours != naive {
                return outcome(false, format!("{name} c={c} T={t}: {ours} vs {naive}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} (field, ϑ, c, T) cases agree"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("covolume lemma, exact", covolume_lemma),
        ("volume linearity", volume_linearity),
        ("translate Siegel identity", translate_siegel),
        ("second-moment boundedness", second_moment),
        ("error scaling", error_scaling),
        ("spiralling product law", spiralling_product),
        ("combinatorics exact", combinatorics),
        ("ideal counting", ideal_counting),
        ("unit-cube sum boundedness", unit_cube),
        ("sandwich inequality", sandwich),
        ("brute-force equivalence", brute_force),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
