mod commands;
mod config;
mod error;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ruin_alloc::{Horizon, RiskModel, SimConfig};

use commands::{parse_horizon, Axis, Grid, Method, Target};
use error::CliError;
use output::Table;

/// Ruin probabilities, dynamic VaR and capital allocation for multivariate risk processes.
#[derive(Debug, Parser)]
#[command(name = "ruin-alloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Model file (JSON)
    #[arg(long)]
    model: PathBuf,
    /// Output CSV file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Sim {
    /// Monte Carlo paths, used only where no closed form exists
    #[arg(long, default_value_t = SimConfig::default().paths)]
    paths: u64,
    #[arg(long, default_value_t = SimConfig::default().seed)]
    seed: u64,
    /// Grid steps per unit time for Brownian paths
    #[arg(long, default_value_t = SimConfig::default().steps_per_unit_time)]
    steps: u32,
    /// Half-width of the supremum-location window; defaults to 0.05·u
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    workers: Option<usize>,
}

impl Sim {
    fn config(&self) -> SimConfig {
        SimConfig {
            paths: self.paths,
            seed: self.seed,
            steps_per_unit_time: self.steps,
            bandwidth: self.bandwidth,
            workers: self.workers,
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ruin probability ψ(u, T)
    Ruin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u: f64,
        #[arg(long, value_parser = parse_horizon, default_value = "inf", allow_hyphen_values = true)]
        horizon: Horizon,
        #[command(flatten)]
        sim: Sim,
    },
    /// Smallest capital with ruin probability at most α
    Var {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = parse_horizon, default_value = "inf", allow_hyphen_values = true)]
        horizon: Horizon,
    },
    /// Allocate a capital level, or the VaR at level α, to the components
    Allocate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_parser = parse_horizon, default_value = "inf", allow_hyphen_values = true)]
        horizon: Horizon,
        #[command(flatten)]
        sim: Sim,
    },
    /// One allocation per point of a grid over u, α or T
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_enum)]
        over: Axis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Space the grid logarithmically
        #[arg(long)]
        log: bool,
        /// Capital, when sweeping over T
        #[arg(long)]
        u: Option<f64>,
        /// VaR level, when sweeping over T
        #[arg(long)]
        alpha: Option<f64>,
        /// Horizon, when sweeping over u or α
        #[arg(long, value_parser = parse_horizon, default_value = "inf", allow_hyphen_values = true)]
        horizon: Horizon,
        #[command(flatten)]
        sim: Sim,
    },
    /// Write the CSV data of every figure panel into a directory
    Figures {
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        /// log10 bounds and count of the α grid, as FROM:TO:POINTS
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-3:-0.3:40")]
        alpha_range: (f64, f64, usize),
        /// Bounds and count of the u grid, as FROM:TO:POINTS
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "0.1:30:60")]
        u_range: (f64, f64, usize),
        /// log10 bounds and count of the T grid, as FROM:TO:POINTS
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-2:2:60")]
        t_range: (f64, f64, usize),
    },
    /// Cross-check closed forms against the simulator and print pass/fail per check
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: Sim,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || format!("expected FROM:TO:POINTS, got {s:?}");
    let [a, b, n] = parts[..] else {
        return Err(bad());
    };
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn with_meta(t: Table, command: &str, model: &RiskModel, seed: Option<u64>) -> Table {
    t.meta("command", command)
        .meta("model_sha256", config::model_hash(model))
        .meta("seed", seed.map_or("none".to_string(), |s| s.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ruin {
            common,
            u,
            horizon,
            sim,
        } => {
            let model = config::parse_config(&common.model)?;
            let t = commands::run_ruin(&model, u, horizon, &sim.config())?;
            with_meta(t, "ruin", &model, Some(sim.seed)).write(common.out.as_deref())
        }
        Command::Var {
            common,
            alpha,
            horizon,
        } => {
            let model = config::parse_config(&common.model)?;
            let t = commands::run_var(&model, alpha, horizon)?;
            with_meta(t, "var", &model, None).write(common.out.as_deref())
        }
        Command::Allocate {
            common,
            method,
            u,
            alpha,
            horizon,
            sim,
        } => {
            let model = config::parse_config(&common.model)?;
            let target = Target::from_flags(u, alpha)?;
            let t = commands::run_allocate(&model, method, target, horizon, &sim.config())?;
            with_meta(t, "allocate", &model, Some(sim.seed)).write(common.out.as_deref())
        }
        Command::Sweep {
            common,
            method,
            over,
            from,
            to,
            points,
            log,
            u,
            alpha,
            horizon,
            sim,
        } => {
            let model = config::parse_config(&common.model)?;
            let target = Target::from_flags(u, alpha)?;
            let grid = Grid {
                from,
                to,
                points,
                log,
            };
            let t =
                commands::run_sweep(&model, method, over, grid, target, horizon, &sim.config())?;
            with_meta(t, "sweep", &model, Some(sim.seed)).write(common.out.as_deref())
        }
        Command::Figures {
            out,
            alpha_range,
            u_range,
            t_range,
        } => {
            let grids = figures::Grids {
                alpha: alpha_range,
                u: u_range,
                t: t_range,
            };
            for name in figures::write_all(&out, &grids)? {
                println!("{}", out.join(name).display());
            }
            Ok(())
        }
        Command::Verify { common, sim } => {
            let model = config::parse_config(&common.model)?;
            let (t, failed) = commands::run_verify(&model, &sim.config())?;
            let t = with_meta(t, "verify", &model, Some(sim.seed)).meta("paths", sim.paths);
            t.write(common.out.as_deref())?;
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
            Ok(())
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let first = e
                .render()
                .to_string()
                .lines()
                .next()
                .unwrap_or_default()
                .to_string();
            return fail(&CliError::Usage(first));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
