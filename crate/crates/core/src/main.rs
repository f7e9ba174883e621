use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chirp::cat::Cat;
use chirp::catrl::Hyper;
use chirp::chirp::{ChirpAgent, ChirpConfig};
use chirp::domains::{make_domain, DomainKind, Simulator, SizeConfig};
use chirp::harness::{emit_curve, metrics_path, run_experiment, summary_path, ExperimentConfig};
use chirp::mdp::Goal;
use chirp::planner::{compute_option_plan, PlannerConfig};
use chirp::{Error, Result};

#[derive(Parser)]
#[command(
    name = "chirp",
    version,
    about = "Continual RL with abstraction trees and invented options"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials of one method on a task stream and write metrics.
    Run(RunArgs),
    /// Show the plan a checkpointed (or fresh) agent makes for a start and goal.
    PlanDebug(PlanArgs),
    /// List the options stored in a checkpoint.
    ListOptions {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Build the fraction-solved curve from metrics files.
    EmitCurve {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "maze")]
    domain: String,
    #[arg(long, default_value = "chirp")]
    method: String,
    #[arg(long, default_value_t = 20)]
    tasks: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-task step budget; defaults to the domain's tabulated value.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// full, desk or WxH.
    #[arg(long, default_value = "full")]
    size: String,
    /// Write an agent checkpoint after every task (chirp only).
    #[arg(long)]
    checkpoint: bool,
    /// `key = value` file applied after the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, conflicts_with = "domain")]
    checkpoint: Option<PathBuf>,
    /// Plan with an empty model over this domain's root tree.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long, default_value = "full")]
    size: String,
    /// Comma-separated state values.
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    /// For example `x in [3, 4); y in [0, 1)`.
    #[arg(long)]
    goal: String,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::new(args.domain.parse()?, args.method.parse()?);
    cfg.set("size", &args.size)?;
    cfg.n_tasks = args.tasks;
    cfg.n_trials = args.trials;
    cfg.seed = args.seed;
    cfg.out = args.out;
    cfg.checkpoint = args.checkpoint;
    if let Some(b) = args.budget {
        cfg.hyper.budget = b;
    }
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    let rows = run_experiment(&cfg)?;
    for t in 0..cfg.n_trials {
        if let Some(last) = rows.iter().rfind(|r| r.trial == t) {
            println!(
                "trial {t}: solved fraction {} after {} steps, {} options, {} leaves",
                last.fraction, last.timesteps, last.options, last.leaves
            );
        }
    }
    println!(
        "metrics: {}",
        metrics_path(&cfg.out, cfg.method, 0).display()
    );
    println!("summary: {}", summary_path(&cfg.out, cfg.method).display());
    Ok(())
}

fn load_agent(path: &PathBuf) -> Result<ChirpAgent> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ChirpAgent::from_checkpoint(&text, ChirpConfig::new(Hyper::default()))
}

fn plan_debug(args: PlanArgs) -> Result<()> {
    let mut agent = match (&args.checkpoint, &args.domain) {
        (Some(p), _) => load_agent(p)?,
        (None, Some(d)) => {
            let kind: DomainKind = d.parse()?;
            let size: SizeConfig = args.size.parse()?;
            let sim = make_domain(kind, size)?;
            ChirpAgent::new(
                Cat::new(sim.schema().clone()),
                ChirpConfig::new(Hyper::default()),
                0,
            )
        }
        (None, None) => return Err(Error::Invalid("give --checkpoint or --domain".into())),
    };
    let schema = agent.cat.schema().clone();
    let values = args
        .start
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad start value `{v}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let start = schema.state(values)?;
    let goal = Goal::parse(&args.goal, &schema)?;
    agent.cat.align_to_goal(&goal);
    let leaf = agent.cat.leaf_of(&start);
    let goals = agent.cat.goal_nodes(&goal);
    println!(
        "tree: {} nodes, {} leaves",
        agent.cat.len(),
        agent.cat.leaf_count()
    );
    println!("options: {}", agent.model.len());
    println!(
        "start leaf #{}: {}",
        leaf.0,
        agent.cat.region(leaf).describe(&schema)
    );
    for g in &goals {
        println!(
            "goal node #{}: {}",
            g.0,
            agent.cat.region(*g).describe(&schema)
        );
    }
    match compute_option_plan(
        &agent.model,
        &agent.cat,
        leaf,
        &goals,
        PlannerConfig::default(),
    )? {
        Some(plan) => {
            println!("cost: {}", plan.cost);
            println!("{}", agent.describe_plan(&plan));
        }
        None => println!("no plan"),
    }
    Ok(())
}

fn list_options(path: &PathBuf) -> Result<()> {
    let agent = load_agent(path)?;
    let schema = agent.cat.schema();
    if agent.model.is_empty() {
        println!("no options");
    }
    for o in agent.model.options() {
        println!(
            "option {}: success {}, stepmax {}, task {}, segment [{}, {}), {} leaves",
            o.id,
            o.success,
            o.stepmax,
            o.provenance.task,
            o.provenance.segment.0,
            o.provenance.segment.1,
            o.learner.cat.leaf_count()
        );
        for r in &o.signature.initiation {
            println!("  from {}", r.describe(schema));
        }
        for r in &o.signature.termination {
            println!("  to   {}", r.describe(schema));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::PlanDebug(args) => plan_debug(args),
        Command::ListOptions { checkpoint } => list_options(&checkpoint),
        Command::EmitCurve { out, metrics } => emit_curve(&metrics, &out).map(|points| {
            println!("{} points written to {}", points.len(), out.display());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
