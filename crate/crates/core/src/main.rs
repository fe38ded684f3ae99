use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nnlif::harness::output::{write_orders, write_run, write_stationary};
use nnlif::harness::{
    convergence_order, oscillation_report, run_scenario, Axis, ScenarioConfig, StopReason,
};
use nnlif::stationary::{find_stationary_rates, stationary_density, RootSearch};
use nnlif::Error;

#[derive(Parser)]
#[command(
    name = "nnlif",
    version,
    about = "Finite-volume solver for the NNLIF Fokker-Planck equation"
)]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write rate.csv, mass.csv and any requested tables.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Self-convergence study, written to orders.csv.
    Convergence {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Find stationary firing rates for the scenario's parameters and grid.
    Stationary {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        n_max: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Space,
    Time,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            if !cli.quiet {
                eprintln!("error: {e}");
            }
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidParameter { .. } => {
                    EXIT_CONFIG
                }
                _ => EXIT_NUMERICAL,
            })
        }
    }
}

fn load(path: &Path) -> nnlif::Result<ScenarioConfig> {
    ScenarioConfig::from_file(path)
}

fn dispatch(cli: &Cli) -> nnlif::Result<ExitCode> {
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match &cli.command {
        Command::Run { config, out } => {
            let cfg = load(config)?;
            let res = run_scenario(&cfg)?;
            write_run(out, &res)?;
            let last = res.rate.last().copied().unwrap_or((0.0, f64::NAN));
            say(format!("stop: {} at t = {}", res.stop.label(), res.final_t));
            say(format!(
                "final N = {:.10}, mass = {:.15}",
                last.1, res.final_mass
            ));
            if res.negative_steps > 0 {
                say(format!(
                    "steps with negative density: {}",
                    res.negative_steps
                ));
            }
            if cfg.variant.is_some() && res.rate.len() >= 100 {
                say(oscillation_report(&res.rate).summary());
            }
            Ok(match res.stop {
                StopReason::Instability { .. } => ExitCode::from(EXIT_NUMERICAL),
                _ => ExitCode::SUCCESS,
            })
        }
        Command::Convergence {
            config,
            axis,
            levels,
            out,
        } => {
            let cfg = load(config)?;
            let axis = match axis {
                AxisArg::Space => Axis::Space,
                AxisArg::Time => Axis::Time,
            };
            let rows = convergence_order(&cfg, axis, *levels)?;
            std::fs::create_dir_all(out)?;
            write_orders(&out.join("orders.csv"), &rows)?;
            let err = |x: Option<f64>| x.map_or("unstable".to_string(), |v| format!("{v:.4e}"));
            let ord = |x: Option<f64>, last: bool| match (last, x) {
                (true, _) => "---".to_string(),
                (false, Some(v)) => format!("{v:.4}"),
                (false, None) => "unstable".to_string(),
            };
            for r in &rows {
                say(format!(
                    "{:>2}  {:.6e}  L1 {}  order {}  Linf {}  order {}",
                    r.level,
                    r.h_or_tau,
                    err(r.err_l1),
                    ord(r.order_l1, r.last),
                    err(r.err_linf),
                    ord(r.order_linf, r.last),
                ));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stationary { config, out, n_max } => {
            let cfg = load(config)?;
            let grid = cfg.grid()?;
            let rates = find_stationary_rates(
                &cfg.params,
                &grid,
                RootSearch {
                    n_max: *n_max,
                    ..Default::default()
                },
            )?;
            if rates.is_empty() {
                say(format!("no stationary rate in (0, {n_max}]"));
            }
            for r in &rates {
                say(format!("N_inf = {r:.10}"));
            }
            let profiles = rates
                .iter()
                .map(|&r| Ok((r, stationary_density(r, &grid, &cfg.params)?)))
                .collect::<nnlif::Result<Vec<_>>>()?;
            std::fs::create_dir_all(out)?;
            write_stationary(
                &out.join("stationary_rates.csv"),
                &out.join("stationary_profiles.csv"),
                &rates,
                &profiles,
                &grid.nodes(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
