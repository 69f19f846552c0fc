//! `gfsim`: construct spreading matrices, evaluate the closed-form design
//! models, and run Monte-Carlo link-level experiments.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or parameter error.

use anyhow::Context;
use clap::{Parser, Subcommand};
use gfsim_core::seqmat::{construct_peg, cycle_census, read_matrix, write_matrix};
use gfsim_core::sim::{sweep, sweep_to_writer, ScenarioConfig};
use gfsim_core::theory::{
    complexity_approx, g_upper_bound, optimize_r, rfa_theory, DesignPoint,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gfsim", version, about = "Grant-free random access simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a regular spreading matrix by progressive edge growth.
    Construct {
        /// Time-slots L (matrix rows).
        #[arg(long)]
        rows: usize,
        /// Users N (matrix columns).
        #[arg(long)]
        cols: usize,
        /// Column weight w_c (packet repetitions per user).
        #[arg(long)]
        colweight: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output matrix file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the 4/6/8-cycle census of a matrix file as JSON.
    Census {
        /// Matrix file to analyze.
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Evaluate the closed-form false-alarm model at a design point.
    Analyze {
        /// Active-user sparsity in (0, 1).
        #[arg(long)]
        lambda: f64,
        /// Column weight w_c.
        #[arg(long)]
        colweight: usize,
        /// Ratio r = L / N in (0, 1).
        #[arg(long)]
        ratio: f64,
        /// Packet length K; with --psk, adds detection-cost estimates.
        #[arg(long)]
        packet_len: Option<usize>,
        /// PSK order M for the detection-cost estimates.
        #[arg(long)]
        psk: Option<usize>,
        /// Slot count L for the detection-cost estimates.
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Smallest ratio r whose worst-case false-alarm ratio stays below tau.
    Optimize {
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 2)]
        colweight: usize,
    },
    /// Run a single-point scenario from a JSON config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Optional CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the full (lambda, SNR) grid from a JSON config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum CliError {
    /// Bad parameter values: exit code 2.
    Usage(String),
    /// Failure while doing the work: exit code 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Construct {
            rows,
            cols,
            colweight,
            seed,
            out,
        } => {
            if colweight < 2 || colweight >= rows || rows >= cols {
                return Err(CliError::Usage(format!(
                    "need 2 <= colweight < rows < cols, got rows={rows}, cols={cols}, colweight={colweight}"
                )));
            }
            let matrix = construct_peg(rows, cols, colweight, seed)
                .context("matrix construction failed")?;
            write_matrix(&matrix, &out).context("writing matrix file")?;
            println!(
                "{}",
                json!({
                    "rows": rows,
                    "cols": cols,
                    "col_weight": colweight,
                    "seed": seed,
                    "out": out.display().to_string(),
                })
            );
            Ok(())
        }
        Command::Census { matrix } => {
            let matrix = read_matrix(&matrix).context("reading matrix file")?;
            let census = cycle_census(&matrix);
            println!("{}", serde_json::to_string(&census).context("encoding census")?);
            Ok(())
        }
        Command::Analyze {
            lambda,
            colweight,
            ratio,
            packet_len,
            psk,
            slots,
        } => {
            let dp = DesignPoint::new(lambda, colweight, ratio)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let mut record = json!({
                "input": {"lambda": lambda, "col_weight": colweight, "ratio": ratio},
                "rfa_theory": rfa_theory(&dp),
                "g_upper_bound": g_upper_bound(&dp),
            });
            if let (Some(k), Some(m)) = (packet_len, psk) {
                let w_r = colweight as f64 / ratio;
                if (w_r - w_r.round()).abs() > 1e-9 {
                    return Err(CliError::Usage(format!(
                        "detection-cost estimates need an integer row weight; colweight/ratio = {w_r}"
                    )));
                }
                let slots = slots.ok_or_else(|| {
                    CliError::Usage("--slots is required with --packet-len/--psk".into())
                })?;
                record["complexity_approx"] =
                    complexity_approx(lambda, w_r.round() as usize, k, slots, m).into();
            }
            println!("{record}");
            Ok(())
        }
        Command::Optimize { tau, colweight } => {
            if tau <= 0.0 {
                return Err(CliError::Usage(format!("tau must be positive, got {tau}")));
            }
            if colweight < 2 {
                return Err(CliError::Usage(format!(
                    "colweight must be at least 2, got {colweight}"
                )));
            }
            let r_star =
                optimize_r(tau, colweight).context("no feasible ratio for this target")?;
            println!(
                "{}",
                json!({"input": {"tau": tau, "col_weight": colweight}, "r_star": r_star})
            );
            Ok(())
        }
        Command::Simulate { config, out, seed } => {
            let mut cfg = load_config(&config, seed)?;
            if cfg.lambdas.len() != 1 || cfg.snrs_db.len() != 1 {
                return Err(CliError::Usage(format!(
                    "simulate runs a single point; config has {} lambda x {} SNR values (use sweep)",
                    cfg.lambdas.len(),
                    cfg.snrs_db.len()
                )));
            }
            cfg.validate().map_err(|e| CliError::Runtime(e.into()))?;
            let records = match out {
                Some(path) => sweep(&cfg, &path).context("running simulation")?,
                None => sweep_to_writer(&cfg, None).context("running simulation")?,
            };
            println!(
                "{}",
                serde_json::to_string(&records[0]).context("encoding record")?
            );
            Ok(())
        }
        Command::Sweep { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let records = sweep(&cfg, &out).context("running sweep")?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
            Ok(())
        }
    }
}

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::from_json_file(path)
        .map_err(|e| CliError::Runtime(anyhow::Error::from(e)))?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    Ok(cfg)
}
