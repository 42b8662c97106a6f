mod commands;
mod config;
mod error;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CapConfig, Command, ExperimentConfig, WeightsConfig};
use error::{invalid, CliError};
use report::Format;

#[derive(Parser)]
#[command(name = "nfapprox", version, about = "Weighted Diophantine approximation over number fields")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Count approximates and compare with the volume.
    Count(Flags),
    /// Analytic volume against a Monte Carlo estimate.
    Volume(Flags),
    /// Directional counts for a pair of caps.
    Spiral(Flags),
    /// Run the built-in numerical checks.
    Verify(Flags),
    /// Error series over a T grid with a power-law fit.
    Scaling(Flags),
    /// List principal ideals up to a norm bound.
    Ideals(Flags),
    /// List the built-in fields.
    Presets(Flags),
    /// Run an experiment described by a JSON config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check the structure of a JSON report.
    Validate { report: PathBuf },
}

#[derive(Args, Default)]
struct Flags {
    /// Preset name or path to a field config.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// "equal" or a comma list: a-weights row-major, then b-weights.
    #[arg(long)]
    weights: Option<String>,
    /// Comma list of basis coordinates of ϑ.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long)]
    theta_seed: Option<u64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    /// Comma list, or START:STOP:STEP (inclusive).
    #[arg(long = "T-grid")]
    t_grid: Option<String>,
    /// Two caps separated by a comma, e.g. "hemisphere:+1,full".
    #[arg(long)]
    caps: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    norm_bound: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

fn floats(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("{what}: cannot parse {x:?} as a number")))
        })
        .collect()
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return floats(s, "T-grid");
    }
    if parts.len() != 3 {
        return Err(invalid("T-grid: expected a comma list or START:STOP:STEP"));
    }
    let v = floats(&parts.join(","), "T-grid")?;
    let (start, stop, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !(stop >= start) {
        return Err(invalid("T-grid: need STEP > 0 and STOP ≥ START"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn build_config(command: Command, f: Flags) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::new(command);
    if let Some(v) = f.field {
        cfg.field = v;
    }
    if let Some(v) = f.m {
        cfg.m = v;
    }
    if let Some(v) = f.n {
        cfg.n = v;
    }
    if let Some(v) = f.weights {
        cfg.weights = if v == "equal" {
            WeightsConfig::Named(v)
        } else {
            WeightsConfig::Flat(floats(&v, "weights")?)
        };
    }
    if let Some(v) = f.theta {
        cfg.theta = Some(floats(&v, "theta")?);
    }
    cfg.theta_seed = f.theta_seed.or(cfg.theta_seed);
    if let Some(v) = f.c {
        cfg.c = v;
    }
    cfg.t = f.t.or(cfg.t);
    if let Some(v) = f.t_grid {
        cfg.t_grid = Some(parse_grid(&v)?);
    }
    if let Some(v) = f.caps {
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(invalid("caps: expected two caps separated by a comma"));
        }
        cfg.caps = Some([CapConfig::Short(parts[0].into()), CapConfig::Short(parts[1].into())]);
    }
    if let Some(v) = f.samples {
        cfg.samples = v;
    }
    if let Some(v) = f.seed {
        cfg.seed = v;
    }
    if let Some(v) = f.epsilon {
        cfg.epsilon = v;
    }
    cfg.norm_bound = f.norm_bound.or(cfg.norm_bound);
    cfg.workers = f.workers.or(cfg.workers);
    cfg.out = f.out.or(cfg.out);
    if let Some(v) = f.format {
        cfg.format = v;
    }
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn run(cfg: ExperimentConfig) -> Result<(), CliError> {
    cfg.validate()?;
    if let Some(w) = cfg.workers {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let format = Format::parse(&cfg.format)?;
    let report = commands::execute(&cfg)?;
    let text = report.render(format)?;
    if format == Format::Json {
        report::validate_json(&text)?;
    }
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            write(&dir.join(format!("report.{}", format.extension())), &text)?;
            let mut saved = serde_json::to_string_pretty(&cfg).expect("config serialises");
            saved.push('\n');
            write(&dir.join("config.json"), &saved)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (command, flags) = match cli.action {
        Action::Count(f) => (Command::Count, f),
        Action::Volume(f) => (Command::Volume, f),
        Action::Spiral(f) => (Command::Spiral, f),
        Action::Verify(f) => (Command::Verify, f),
        Action::Scaling(f) => (Command::Scaling, f),
        Action::Ideals(f) => (Command::Ideals, f),
        Action::Presets(f) => (Command::Presets, f),
        Action::Run { config, out, format, workers } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            cfg.out = out.or(cfg.out);
            cfg.format = format.unwrap_or(cfg.format);
            cfg.workers = workers.or(cfg.workers);
            return run(cfg);
        }
        Action::Validate { report } => {
            let text = std::fs::read_to_string(&report).map_err(|e| CliError::io(&report, e))?;
            report::validate_json(&text)?;
            println!("{}: ok", report.display());
            return Ok(());
        }
    };
    run(build_config(command, flags)?)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("5:6:0.5").unwrap(), vec![5.0, 5.5, 6.0]);
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
