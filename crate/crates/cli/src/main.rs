use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ppl_runner::{run, CliError, CliResult, ExperimentConfig, Intensity, Kind};

#[derive(Debug, Parser)]
#[command(name = "ppl", version, about = "Run support-function experiments on Poisson polytopes")]
struct Args {
    /// Experiment kind, e.g. sf-cdf or gumbel-1d.
    kind: String,
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension or comma-separated ladder.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<u64>>,
    /// Fixed L = ln(λκ_d).
    #[arg(long = "L", allow_hyphen_values = true)]
    l: Option<f64>,
    /// Critical regime L = x·d.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    m: Option<u32>,
    /// Comma-separated τ grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau: Option<Vec<f64>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix; writes <out>.csv and <out>.meta.json.
    #[arg(long)]
    out: Option<String>,
}

fn config_error(field: &str, msg: &str) -> CliError {
    CliError::Config { field: field.into(), msg: msg.into() }
}

fn build(args: Args) -> CliResult<ExperimentConfig> {
    let kind = Kind::parse(&args.kind).ok_or_else(|| config_error("kind", &format!("unknown kind `{}`", args.kind)))?;
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => {
            let d = args.d.clone().ok_or_else(|| config_error("d", "no config file and no --d"))?;
            let intensity = match (args.l, args.x) {
                (Some(l), _) => Intensity::Explicit { l },
                (None, Some(x)) => Intensity::Critical { x, y: 0.0 },
                _ => return Err(config_error("intensity", "no config file and neither --L nor --x")),
            };
            ExperimentConfig::new(kind, d, intensity)
        }
    };
    cfg.kind = kind;
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if args.l.is_some() && args.x.is_some() {
        return Err(config_error("intensity", "--L and --x are mutually exclusive"));
    }
    if let Some(l) = args.l {
        cfg.intensity = Intensity::Explicit { l };
    }
    if let Some(x) = args.x {
        cfg.intensity = Intensity::Critical { x, y: 0.0 };
    }
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(tau) = args.tau {
        cfg.tau = tau;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if cfg.out.is_none() {
        cfg.out = Some(format!("ppl-{}", kind.name()));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = build(args).and_then(|cfg| run(&cfg));
    match result {
        Ok(res) => {
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "{} rows in {:.2}s -> {}.csv",
                res.rows.len(),
                res.wall_clock_secs,
                res.config.out.as_deref().unwrap_or("")
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
