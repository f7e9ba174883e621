//! Compares the agent with the tree-learning baseline on a small maze
//! stream and prints their fraction-solved curves.

use chirp::domains::{DomainKind, SizeConfig};
use chirp::harness::{curve, run_experiment, ExperimentConfig, Method, CURVE_STEP};

fn main() -> chirp::Result<()> {
    let out = std::env::temp_dir().join("chirp_experiment");
    let mut rows = Vec::new();
    for method in [Method::Chirp, Method::CatrlBaseline] {
        let mut cfg = ExperimentConfig::new(DomainKind::Maze, method);
        cfg.size = SizeConfig::Desk;
        cfg.n_tasks = 10;
        cfg.n_trials = 3;
        cfg.out = out.clone();
        rows.extend(run_experiment(&cfg)?);
    }
    for p in curve(&rows, CURVE_STEP * 5)? {
        println!(
            "{:>15} {:>8} steps: {:.2} ± {:.2}",
            p.method, p.steps, p.mean, p.std
        );
    }
    println!("metrics in {}", out.display());
    Ok(())
}
