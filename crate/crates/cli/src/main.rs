//! `stadium-limits`: runs the billiard experiments and writes CSV artifacts
//! plus a `summary.json` into the output directory.
//!
//! Exit status: 0 on success, 2 when `validate` finds a failing criterion,
//! 1 on any error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use stadium_limits::parallel::with_workers;
use stadium_limits::report::{to_json, write_artifact};
use stadium_limits::sampling::experiment_base;
use stadium_limits::validate::Tier;

use crate::commands::Outcome;
use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "stadium-limits",
    version,
    about = "Stadium billiard limit-law experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form constants for the chosen length and observable.
    Constants,
    /// One orbit of the collision map, written collision by collision.
    Simulate,
    /// Return-time and induced-observable tails.
    Tails,
    /// Transition law out of the stripes.
    Transitions,
    /// Cascade means and moment bounds.
    Cascade,
    /// Normalized Birkhoff sums against the normal law.
    Clt,
    /// Growth of the variance of Birkhoff sums.
    Variance,
    /// Correlations of the observable at the given lags.
    Correlations,
    /// Birkhoff integrals along the billiard flow.
    Flow,
    /// The acceptance suite.
    Validate {
        /// Reduced sample sizes (the default).
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        /// Full sample sizes.
        #[arg(long)]
        full: bool,
        /// Only these criteria, comma separated.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Length of the straight segments.
    #[arg(long, global = true)]
    ell: Option<f64>,
    /// Observable name or table file.
    #[arg(long, global = true)]
    obs: Option<String>,
    /// Return time, orbit length or sum length, depending on the command.
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Comma-separated list of n values (or lags).
    #[arg(long, global = true, value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,
    /// Number of samples (or orbits).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Products per lag for `correlations`.
    #[arg(long, global = true)]
    pairs: Option<u64>,
    /// Flow time for `flow`.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Gauss-Legendre nodes per flight for `flow`.
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,
    /// Cascades stop after ceil(cap_k ln n) steps.
    #[arg(long, global = true)]
    cap_k: Option<f64>,
    /// Order of the cascade moment bound.
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (falls back to STADIUM_LIMITS_THREADS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Opts {
    fn config(&self) -> Result<RunConfig, String> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:ident => $field:ident) => {
                if let Some(v) = &self.$flag {
                    c.$field = v.clone();
                }
            };
            ($flag:ident => some $field:ident) => {
                if let Some(v) = &self.$flag {
                    c.$field = Some(v.clone());
                }
            };
        }
        set!(ell => ell);
        set!(obs => observable);
        set!(n => some n);
        set!(n_grid => some n_grid);
        set!(samples => some samples);
        set!(pairs => pairs);
        set!(horizon => horizon);
        set!(quad_nodes => quad_nodes);
        set!(cap_k => cap_k);
        set!(s => s);
        set!(seed => master_seed);
        set!(workers => workers);
        set!(out => output_dir);
        Ok(c)
    }
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Constants => "constants",
        Command::Simulate => "simulate",
        Command::Tails => "tails",
        Command::Transitions => "transitions",
        Command::Cascade => "cascade",
        Command::Clt => "clt",
        Command::Variance => "variance",
        Command::Correlations => "correlations",
        Command::Flow => "flow",
        Command::Validate { .. } => "validate",
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Outcome, String> {
    match cmd {
        Command::Constants => commands::constants(cfg),
        Command::Simulate => commands::simulate(cfg),
        Command::Tails => commands::tails(cfg),
        Command::Transitions => commands::transitions(cfg),
        Command::Cascade => commands::cascade(cfg),
        Command::Clt => commands::clt(cfg),
        Command::Variance => commands::variance(cfg),
        Command::Correlations => commands::correlations(cfg),
        Command::Flow => commands::flow(cfg),
        Command::Validate { full, criteria, .. } => {
            let tier = if *full { Tier::Full } else { Tier::Quick };
            commands::run_validate(cfg, tier, criteria)
        }
    }
}

/// Prints scalar results as `key = value`, nested keys joined by dots.
fn print_scalars(prefix: &str, results: &serde_json::Value) {
    if let Some(map) = results.as_object() {
        for (k, v) in map {
            let key = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            if v.is_object() {
                print_scalars(&key, v);
            } else if v.is_number() || v.is_string() || v.is_boolean() {
                println!("{key} = {v}");
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let cfg = cli.opts.config()?;
    let workers = cfg.resolved_workers()?;
    let start = Instant::now();
    let outcome =
        with_workers(workers, || dispatch(&cli.command, &cfg)).map_err(|e| e.to_string())??;
    let wall = start.elapsed().as_secs_f64();
    print_scalars("", &outcome.results);
    for (file, contents) in &outcome.artifacts {
        write_artifact(&cfg.output_dir, file, contents).map_err(|e| e.to_string())?;
    }
    let streams: Vec<_> = outcome
        .streams
        .iter()
        .map(|s| json!({ "name": s, "base_index": experiment_base(s) }))
        .collect();
    let summary = json!({
        "command": name(&cli.command),
        "version": stadium_limits::VERSION,
        "config": cfg,
        "seeds": { "master_seed": cfg.master_seed, "streams": streams },
        "results": outcome.results,
        "artifacts": outcome.artifacts.iter().map(|a| &a.0).collect::<Vec<_>>(),
        "wall_seconds": wall,
    });
    write_artifact(&cfg.output_dir, "summary.json", &to_json(&summary))
        .map_err(|e| e.to_string())?;
    Ok(match outcome.passed {
        Some(false) => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
