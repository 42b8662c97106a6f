//! Command execution: one config in, one report out.

use std::f64::consts::PI;

use nfapprox::diophantine::{analytic_volume_e, count_approximates, error_series, fit_scaling_exponent, mc_volume};
use nfapprox::moments::{
    ideal_norm_values, integer_values, knessl_keller_ratio, rogers_tail_sum, siegel_translate_stats, target_rate,
    thunder_check, time_average_sandwich, unit_cube_sum, z_count_in_box, zeta_bound_value, TranslateOptions,
};
use nfapprox::presets::{catalog, load_field};
use nfapprox::spiralling::{analytic_volume_ab, count_directional, CapSpec};
use nfapprox::{FieldHandle, LatticeSpec, RegionSpec, Theta, WeightScheme};

use crate::config::{CapConfig, Command, ExperimentConfig, WeightsConfig};
use crate::error::{invalid, CliError};
use crate::report::{Cell, Report};

pub fn execute(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut report = match cfg.command {
        Command::Presets => presets()?,
        Command::Count => count(cfg)?,
        Command::Volume => volume(cfg)?,
        Command::Spiral => spiral(cfg)?,
        Command::Scaling => scaling(cfg)?,
        Command::Ideals => ideals(cfg)?,
        Command::Verify => verify(cfg)?,
    };
    let mut meta = vec![
        ("version".to_string(), nfapprox::VERSION.to_string()),
        ("command".to_string(), cfg.command.name().to_string()),
        ("config_hash".to_string(), cfg.hash()),
        ("seed".to_string(), cfg.seed.to_string()),
    ];
    meta.append(&mut report.meta);
    report.meta = meta;
    Ok(report)
}

fn weights(field: &FieldHandle, cfg: &ExperimentConfig) -> Result<WeightScheme, CliError> {
    match &cfg.weights {
        WeightsConfig::Named(_) => Ok(WeightScheme::equal(field, cfg.m, cfg.n)),
        WeightsConfig::Flat(w) => {
            let p = field.num_places();
            if w.len() != (cfg.m + cfg.n) * p {
                return Err(invalid(format!(
                    "weights: need {} values ({} a-weights then {} b-weights), got {}",
                    (cfg.m + cfg.n) * p,
                    cfg.m * p,
                    cfg.n * p,
                    w.len()
                )));
            }
            let (a, b) = w.split_at(cfg.m * p);
            Ok(WeightScheme::new(field, cfg.m, cfg.n, a.to_vec(), b.to_vec())?)
        }
    }
}

fn theta(field: &FieldHandle, cfg: &ExperimentConfig) -> Result<Theta, CliError> {
    match &cfg.theta {
        Some(coords) => Ok(Theta::from_basis_coords(field, cfg.m, cfg.n, coords)?),
        None => {
            let mut r = nfapprox::rng::stream(cfg.theta_seed.unwrap_or(cfg.seed), 0);
            Ok(Theta::random(field, cfg.m, cfg.n, &mut r))
        }
    }
}

fn cap(c: &CapConfig, dim: usize) -> Result<CapSpec, CliError> {
    let spec = match c {
        CapConfig::Short(s) => CapSpec::parse(s, dim)?,
        CapConfig::Cap { center, radius } => CapSpec::cap(center.clone(), *radius)?,
    };
    spec.check_dim(dim)?;
    Ok(spec)
}

fn presets() -> Result<Report, CliError> {
    let mut r = Report::new(&["name", "degree", "r1", "r2", "unit_rank"]);
    for e in catalog()? {
        r.push(vec![e.name.into(), e.degree.into(), e.r1.into(), e.r2.into(), e.unit_rank.into()]);
    }
    Ok(r)
}

fn count(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let field = load_field(&cfg.field)?;
    let w = weights(&field, cfg)?;
    let spec = LatticeSpec::new(&field, theta(&field, cfg)?)?;
    let t = cfg.t.expect("validated");
    let n = count_approximates(&spec, &w, cfg.c, t)?;
    let vol = analytic_volume_e(&field, &w, cfg.c, t);
    let mut r = Report::new(&["field", "c", "T", "count", "volume", "error"]);
    r.push(vec![field.name().into(), cfg.c.into(), t.into(), n.into(), vol.into(), (n as f64 - vol).into()]);
    Ok(r)
}

fn volume(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let field = load_field(&cfg.field)?;
    let w = weights(&field, cfg)?;
    let t = cfg.t.expect("validated");
    let exact = analytic_volume_e(&field, &w, cfg.c, t);
    let est = mc_volume(&field, &w, &RegionSpec::e(cfg.c, t), cfg.samples, cfg.seed)?;
    let z = if est.std_error > 0.0 {
        (est.estimate - exact) / est.std_error
    } else {
        0.0
    };
    let mut r = Report::new(&["field", "c", "T", "analytic", "mc_estimate", "mc_stderr", "z", "samples"]);
    r.push(vec![
        field.name().into(),
        cfg.c.into(),
        t.into(),
        exact.into(),
        est.estimate.into(),
        est.std_error.into(),
        z.into(),
        est.samples.into(),
    ]);
    Ok(r)
}

fn spiral(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let field = load_field(&cfg.field)?;
    let w = weights(&field, cfg)?;
    let spec = LatticeSpec::new(&field, theta(&field, cfg)?)?;
    let t = cfg.t.expect("validated");
    let deg = field.degree();
    let full = CapConfig::Short("full".into());
    let (ca, cb) = match &cfg.caps {
        Some([a, b]) => (a, b),
        None => (&full, &full),
    };
    let a = cap(ca, cfg.m * deg)?;
    let b = cap(cb, cfg.n * deg)?;
    let n = count_approximates(&spec, &w, cfg.c, t)?;
    let nab = count_directional(&spec, &w, cfg.c, t, &a, &b)?;
    let vol = analytic_volume_e(&field, &w, cfg.c, t);
    let vol_ab = analytic_volume_ab(&field, &w, cfg.c, t, &a, &b, cfg.samples, cfg.seed)?;
    let fraction = if n > 0 { Some(nab as f64 / n as f64) } else { None };
    let mut r = Report::new(&["field", "c", "T", "count", "count_AB", "volume", "volume_AB", "fraction", "vol_A_vol_B"]);
    r.push(vec![
        field.name().into(),
        cfg.c.into(),
        t.into(),
        n.into(),
        nab.into(),
        vol.into(),
        vol_ab.into(),
        fraction.into(),
        (if vol > 0.0 { Some(vol_ab / vol) } else { None }).into(),
    ]);
    Ok(r)
}

fn scaling(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let field = load_field(&cfg.field)?;
    let w = weights(&field, cfg)?;
    let spec = LatticeSpec::new(&field, theta(&field, cfg)?)?;
    let grid = cfg.t_grid.as_ref().expect("validated");
    let series = error_series(&spec, &w, cfg.c, grid)?;
    let mut r = Report::new(&["T", "count", "volume", "error", "target_rate"]);
    for p in &series {
        r.push(vec![
            p.t.into(),
            p.count.into(),
            p.volume.into(),
            p.error.into(),
            target_rate(p.t, cfg.epsilon).ok().into(),
        ]);
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|p| (p.t, p.error)).collect();
    match fit_scaling_exponent(&pts, grid[0], cfg.epsilon) {
        Ok(fit) => {
            r.meta("fit_slope", crate::report::fmt_g(fit.slope));
            r.meta("fit_r2", crate::report::fmt_g(fit.r2));
            if let Some(q) = fit.max_rate_ratio {
                r.meta("max_rate_ratio", crate::report::fmt_g(q));
            }
        }
        Err(e) => r.meta("fit", format!("unavailable: {e}")),
    }
    Ok(r)
}

fn ideals(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let field = load_field(&cfg.field)?;
    let s = cfg.norm_bound.expect("validated");
    let list = field.principal_ideals(s)?;
    let mut r = Report::new(&["norm", "generator", "cumulative"]);
    for (k, i) in list.iter().enumerate() {
        let gen: Vec<String> = i.generator.coords.iter().map(|c| c.to_string()).collect();
        r.push(vec![i.norm.into(), gen.join(" ").into(), (k + 1).into()]);
    }
    if r.rows.is_empty() {
        return Err(invalid("norm_bound: no ideals below the bound"));
    }
    Ok(r)
}

struct Check {
    name: String,
    lhs: f64,
    rhs: f64,
    margin: f64,
    pass: bool,
}

impl Check {
    /// Passes when `lhs ≤ rhs`; margin `rhs − lhs`.
    fn at_most(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs <= rhs,
        }
    }

    /// Passes when `|lhs − rhs| ≤ tol`; margin `tol − |lhs − rhs|`.
    fn close(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = tol - (lhs - rhs).abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0,
        }
    }
}

fn verify(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let field = load_field(&cfg.field)?;
    let name = field.name().to_string();
    let w = WeightScheme::equal(&field, 1, 1);
    let t = cfg.t.unwrap_or(1.0);
    let mut checks = Vec::new();

    let exact = analytic_volume_e(&field, &w, cfg.c, t);
    let est = mc_volume(&field, &w, &RegionSpec::e(cfg.c, t), cfg.samples, cfg.seed)?;
    checks.push(Check::close(&format!("volume_mc_{name}"), est.estimate, exact, 3.0 * est.std_error));

    let opts = TranslateOptions::new(200, cfg.seed).with_push(7.0);
    let stats = siegel_translate_stats(&field, &w, &RegionSpec::e(cfg.c, t), &opts)?;
    checks.push(Check::close(
        &format!("translate_mean_{name}"),
        stats.empirical_mean,
        stats.reference_value,
        3.0 * stats.standard_error,
    ));

    let tail = rogers_tail_sum(&field, 3, 1000)?;
    let bound = zeta_bound_value(&field, 3, 1000)?;
    checks.push(Check::at_most(&format!("rogers_tail_vs_zeta_bound_{name}"), tail, bound.value));

    if field.unit_rank() > 0 {
        let sums: Vec<f64> = (0..4)
            .map(|l| unit_cube_sum(&field, l as f64, 40).map(|s| s.value))
            .collect::<Result<_, _>>()?;
        let spread = sums.iter().cloned().fold(0.0, f64::max) / sums.iter().cloned().fold(f64::INFINITY, f64::min);
        checks.push(Check::at_most(&format!("unit_cube_spread_{name}"), spread, 3.0));
    }

    let th = thunder_check(1.0, 1.0, 0.0, integer_values, |x| x.powi(-2), 1e5)?;
    checks.push(Check {
        name: "thunder_integers".into(),
        lhs: th.lhs,
        rhs: th.rhs,
        margin: th.rhs - th.lhs,
        pass: th.holds,
    });
    let th = thunder_check(1.0, 1.0, 0.5, ideal_norm_values(&field), |x| x.powf(-1.5), 1e4)?;
    checks.push(Check {
        name: format!("thunder_ideals_{name}"),
        lhs: th.lhs,
        rhs: th.rhs,
        margin: th.rhs - th.lhs,
        pass: th.holds,
    });

    let spec = LatticeSpec::new(&field, theta(&field, &ExperimentConfig { m: 1, n: 1, ..cfg.clone() })?)?;
    let s = time_average_sandwich(&spec, &w, cfg.c, 2.0, 6.0, 0.01)?;
    checks.push(Check::at_most("sandwich_lower", s.lower as f64, s.middle + s.slack));
    checks.push(Check::at_most("sandwich_upper", s.middle, s.upper as f64 + s.slack));

    checks.push(Check::close("knessl_keller_ratio_3_200", knessl_keller_ratio(3, 200), 1.0, 0.25));
    let total: u64 = (0..=15u64)
        .flat_map(|m| (0..=15u64).map(move |n| z_count_in_box(3, m, n, 5)))
        .sum();
    checks.push(Check::close("z_count_box_identity", total as f64, 1331.0, 0.0));
    if name == "Qi" {
        let density = field.count_principal_ideals(1e4)? as f64 / 1e4;
        checks.push(Check::close("gaussian_ideal_density", density, PI / 4.0, 0.01 * PI / 4.0));
    }

    let mut r = Report::new(&["check_name", "lhs", "rhs", "margin", "pass"]);
    for c in checks {
        r.push(vec![c.name.into(), c.lhs.into(), c.rhs.into(), c.margin.into(), Cell::Bool(c.pass)]);
    }
    Ok(r)
}
