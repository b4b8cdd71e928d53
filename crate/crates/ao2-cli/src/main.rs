//! `ao2` command line: train on an environment, evaluate a frozen pool,
//! export pools for inspection, replay the dynamics oracle, and explain
//! individual logged decisions.
//!
//! Failures print one machine-readable JSON line on stderr and exit
//! nonzero.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ao2_core::env::{oracle, Action, ActionMode, Env};
use ao2_core::harness::{phase_detect, run_experiment, write_outputs};
use ao2_core::inference::{find_most_similar, select_action_from, InferenceConfig};
use ao2_core::interpret::{explain_step, export_dot, pool_view};
use ao2_core::trace::read_trace;
use ao2_core::{AttentionWeights, OptionPool, RunFileConfig};

#[derive(Parser)]
#[command(name = "ao2", version, about = "Schema-based reinforcement learner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train learners and write result files.
    Run(RunArgs),
    /// Evaluate a frozen pool without learning.
    Eval(EvalArgs),
    /// Export a pool as a DOT graph.
    Export(ExportArgs),
    /// Replay a dynamics oracle table against the native environments.
    Oracle(OracleArgs),
    /// Explain one logged decision.
    Explain(ExplainArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Environment name: cartpole-v0, pendulum-v0, or acrobot-v1.
    #[arg(long)]
    env: String,
    /// Flat key-value configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Replica count; overrides the configuration file.
    #[arg(long)]
    replicas: Option<usize>,
    /// Episode budget; overrides the configuration file.
    #[arg(long)]
    episodes: Option<usize>,
    /// Output directory for returns.csv, curve.csv, trace.csv, pool.json
    /// and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the per-step decision trace (smaller outputs, faster runs).
    #[arg(long)]
    no_trace: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Pool snapshot to evaluate.
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    env: String,
    #[arg(long)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    pool: PathBuf,
    /// Where to write the DOT text.
    #[arg(long)]
    dot: PathBuf,
    /// Optional trace log; adds visit counts to node labels.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    env: String,
    /// Transition table (CSV) generated from the reference implementation.
    #[arg(long)]
    table: PathBuf,
    /// Componentwise tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    /// Global step index of the row to explain.
    #[arg(long)]
    step: u64,
    /// Print the explanation as JSON instead of aligned text.
    #[arg(long)]
    json: bool,
    /// Attention weights as comma-separated values (default: all ones).
    #[arg(long)]
    weights: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Eval(args) => eval(args),
        Command::Export(args) => export(args),
        Command::Oracle(args) => oracle_cmd(args),
        Command::Explain(args) => explain(args),
    };
    if let Err(err) = outcome {
        eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
        std::process::exit(1);
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let file_cfg = match &args.config {
        Some(path) => RunFileConfig::load(path)?,
        None => RunFileConfig::default(),
    };
    let mut cfg = file_cfg.experiment(&args.env)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(replicas) = args.replicas {
        cfg.replicas = replicas;
    }
    if let Some(episodes) = args.episodes {
        cfg.episodes = episodes;
    }
    cfg.collect_trace = !args.no_trace;
    cfg.validate()?;

    let records = run_experiment(&cfg)?;
    for r in &records {
        let jumps = phase_detect(&r.curve.iter().map(|p| p.mean_reward).collect::<Vec<_>>());
        println!(
            "replica {:02}: episodes={} steps={} best_window={:.2} last_window={:.2} pool_nodes={} jumps={:?} ({} ms)",
            r.replica,
            r.returns.len(),
            r.total_steps,
            r.best_window_mean,
            r.last_window_mean,
            r.pool.len(),
            jumps,
            r.duration_ms,
        );
    }
    if let Some(dir) = &args.out {
        write_outputs(&cfg, &records, dir)?;
        println!("results written to {}", dir.display());
    }
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let pool = OptionPool::load(&args.pool)?;
    let grid = pool.action_count();
    let mut env = Env::by_name(&args.env, args.seed, grid)?;
    let spec = env.spec();
    if spec.obs_dim != pool.obs_dim() {
        bail!(
            "pool observation dimension {} does not match {} ({})",
            pool.obs_dim(),
            args.env,
            spec.obs_dim
        );
    }
    if spec.action_mode.action_count() != pool.action_count() {
        bail!(
            "pool action count {} does not match {}",
            pool.action_count(),
            args.env
        );
    }
    let w = AttentionWeights::ones(pool.obs_dim());
    let icfg = InferenceConfig::default();
    let mut total = 0.0;
    println!("episode,return");
    for episode in 0..args.episodes {
        let mut obs = env.reset();
        let mut ep_return = 0.0;
        loop {
            let entry = find_most_similar(&pool, &obs, &w)?;
            let path = select_action_from(&pool, entry, &obs, &w, &icfg)?;
            let action = match spec.action_mode {
                ActionMode::Discrete { .. } => Action::Discrete(path.action_index),
                ActionMode::Continuous { lo, hi, grid } => Action::Continuous(
                    ao2_core::env::discretize_action(path.action_index, lo, hi, grid)?,
                ),
            };
            let outcome = env.step(action)?;
            ep_return += outcome.reward;
            if outcome.done {
                break;
            }
            obs = outcome.observation;
        }
        println!("{episode},{ep_return}");
        total += ep_return;
    }
    println!("mean,{}", total / args.episodes.max(1) as f64);
    Ok(())
}

fn export(args: ExportArgs) -> anyhow::Result<()> {
    let pool = OptionPool::load(&args.pool)?;
    let view = match &args.trace {
        Some(path) => Some(pool_view(&pool, &read_trace(path)?)),
        None => None,
    };
    let dot = export_dot(&pool, view.as_ref());
    std::fs::write(&args.dot, dot)
        .with_context(|| format!("writing {}", args.dot.display()))?;
    println!("wrote {}", args.dot.display());
    Ok(())
}

fn oracle_cmd(args: OracleArgs) -> anyhow::Result<()> {
    let rows = oracle::parse_table(&args.table)?;
    let mut checked = 0;
    let mut failed = 0;
    let mut max_err: f64 = 0.0;
    for row in rows.iter().filter(|r| r.env == args.env) {
        let check = oracle::check_row(row)?;
        checked += 1;
        max_err = max_err.max(check.max_err);
        if !check.passes(args.tolerance) {
            failed += 1;
        }
    }
    if checked == 0 {
        bail!("table holds no rows for {}", args.env);
    }
    println!(
        "{}: rows={checked} max_err={max_err:.3e} tolerance={:.1e}",
        args.env, args.tolerance
    );
    if failed > 0 {
        bail!("{failed} of {checked} transitions exceeded the tolerance");
    }
    Ok(())
}

fn explain(args: ExplainArgs) -> anyhow::Result<()> {
    let pool = OptionPool::load(&args.pool)?;
    let rows = read_trace(&args.trace)?;
    let row = rows
        .iter()
        .find(|r| r.step == args.step)
        .with_context(|| format!("no trace row with step {}", args.step))?;
    let w = match &args.weights {
        Some(text) => {
            let components = text
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .context("parsing --weights")?;
            AttentionWeights::new(components)?
        }
        None => AttentionWeights::ones(pool.obs_dim()),
    };
    let explanation = explain_step(row, &pool, &w)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&explanation)?);
    } else {
        println!("{explanation}");
    }
    Ok(())
}
