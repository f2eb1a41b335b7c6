//! Command-line entry point: `airfed run` executes one simulation,
//! `airfed sweep` repeats it over a list of bias factors, writing one
//! output file per value.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use airfed::config::{load_config, Policy, SimConfig};
use airfed::output::{render_history, RoundRecord};
use airfed::trainer;

#[derive(Parser)]
#[command(name = "airfed", about = "Energy-aware robust federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write the per-round metrics.
    Run {
        /// TOML config file.
        #[arg(long)]
        config: PathBuf,
        /// Override the client-selection policy.
        #[arg(long, value_parser = parse_policy)]
        policy: Option<Policy>,
        /// Override the energy-conservation bias factor C.
        #[arg(long)]
        bias_factor: Option<f64>,
        /// Override the RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run once per bias factor, writing `<out>_C<value>.csv` each time.
    Sweep {
        /// TOML config file.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated bias factors, e.g. `0,2,8,64`.
        #[arg(long, value_delimiter = ',', required = true)]
        bias_factors: Vec<f64>,
    },
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse::<Policy>().map_err(|e| e.to_string())
}

fn write_history(path: &Path, history: &[RoundRecord]) -> airfed::Result<()> {
    let text = render_history(history);
    std::fs::write(path, text)
        .map_err(|e| airfed::Error::Io { path: path.display().to_string(), source: e })
}

fn run_once(cfg: SimConfig) -> airfed::Result<()> {
    let out = cfg.output_path.clone();
    let policy = cfg.policy;
    let history = trainer::run(cfg)?;
    write_history(&out, &history)?;
    let last = history.last();
    println!(
        "{policy}: {} rounds, final worst accuracy {}, cumulative energy {} J -> {}",
        history.len(),
        last.map_or(f64::NAN, |r| r.worst_accuracy),
        last.map_or(0.0, |r| r.cumulative_energy_j),
        out.display(),
    );
    Ok(())
}

/// `out.csv` + C=2 -> `out_C2.csv`
fn sweep_path(base: &Path, c: f64) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("airfed_out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_C{c}.{ext}"))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            policy,
            bias_factor,
            seed,
            out,
        } => load_config(&config).and_then(|mut cfg| {
            if let Some(policy) = policy {
                cfg.policy = policy;
            }
            if let Some(c) = bias_factor {
                cfg.bias_factor = c;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_path = out;
            }
            cfg.validate()?;
            run_once(cfg)
        }),
        Command::Sweep {
            config,
            bias_factors,
        } => load_config(&config).and_then(|cfg| {
            for &c in &bias_factors {
                let mut swept = cfg.clone();
                swept.bias_factor = c;
                swept.output_path = sweep_path(&cfg.output_path, c);
                swept.validate()?;
                run_once(swept)?;
            }
            Ok(())
        }),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
