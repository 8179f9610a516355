use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cbrs_core::graph::ConflictGraph;
use cbrs_core::harness::{self, Algorithm, Axis, ExperimentConfig, SolverSpec};
use cbrs_core::objective::{PenaltyKind, RewardKind};
use cbrs_core::scenario::Scenario;

#[derive(Parser, Debug)]
#[command(name = "cbrs", version, about = "CBRS channel assignment and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a scenario and print it as JSON.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the conflict graph a solver would use.
    Graph {
        /// Scenario JSON from `gen`; generated from --config/--seed when omitted.
        scenario: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a graph JSON from `graph`.
    Solve {
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and write the results CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Use seeds 0..N instead of the configured list.
        #[arg(long)]
        seeds: Option<u64>,
        /// Record solver runtimes.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment once per value of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// lambda, alpha-bar, epsilon, radius, m, r-s or density.
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// gmwis, um, npsmc, mra or random.
    #[arg(long, default_value = "gmwis")]
    solver: Algorithm,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long = "alpha-bar", default_value_t = 0.0)]
    alpha_bar: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// linear, log, capacity or unit.
    #[arg(long, default_value = "linear", value_parser = parse_kind::<RewardKind>)]
    reward: RewardKind,
    /// interference or capacity.
    #[arg(long, default_value = "interference", value_parser = parse_kind::<PenaltyKind>)]
    penalty: PenaltyKind,
    #[arg(long, default_value_t = cbrs_core::solve::DEFAULT_TRIALS)]
    trials: usize,
}

impl SolverArgs {
    fn spec(&self) -> SolverSpec {
        SolverSpec {
            algorithm: self.solver,
            label: None,
            lambda: self.lambda,
            alpha_bar: self.alpha_bar,
            epsilon: self.epsilon,
            reward: self.reward,
            penalty: self.penalty,
            trials: self.trials,
        }
    }
}

fn parse_kind<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|_| format!("unknown value {s:?}"))
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_json_file(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn prepare(mut cfg: ExperimentConfig, seeds: Option<u64>, timing: bool, out: Option<PathBuf>) -> Result<(ExperimentConfig, PathBuf)> {
    if let Some(n) = seeds {
        cfg.seeds = (0..n).collect();
    }
    cfg.timing |= timing;
    let Some(out) = out.or_else(|| cfg.output.clone()) else {
        bail!("no output path: pass --out or set \"output\" in the config");
    };
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { config, seed, out } => {
            let cfg = load_config(config.as_deref())?;
            let scenario = cfg.scenario.build(cfg.master_seed, seed)?;
            emit(&scenario, out.as_deref())
        }
        Command::Graph {
            scenario,
            config,
            seed,
            solver,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let scenario: Scenario = match scenario {
                Some(p) => read_json(&p)?,
                None => cfg.scenario.build(cfg.master_seed, seed)?,
            };
            let g = harness::build_graph(&scenario, &solver.spec(), seed)?;
            emit(&g, out.as_deref())
        }
        Command::Solve { graph, seed, solver, out } => {
            let g: ConflictGraph = read_json(&graph)?;
            let sol = harness::solve_graph(&g, &solver.spec(), seed)?;
            emit(&sol, out.as_deref())
        }
        Command::Bench {
            config,
            seeds,
            timing,
            out,
        } => {
            let (cfg, out) = prepare(load_config(Some(&config))?, seeds, timing, out)?;
            let table = harness::run_to_files(&cfg, None, &out)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            values,
            seeds,
            timing,
            out,
        } => {
            let (cfg, out) = prepare(load_config(Some(&config))?, seeds, timing, out)?;
            let table = harness::run_to_files(&cfg, Some((axis, &values)), &out)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
