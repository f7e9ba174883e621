//! Runs the full agent over a stream of maze tasks, reusing and inventing
//! options as it goes, and saves a checkpoint at the end.

use chirp::cat::Cat;
use chirp::chirp::{ChirpAgent, ChirpConfig};
use chirp::domains::{make_domain, sample_stream, DomainKind, Simulator, SizeConfig};
use chirp::harness::{default_hyper, Method};

fn main() -> chirp::Result<()> {
    let sim = make_domain(DomainKind::Maze, SizeConfig::Desk)?;
    let hyper = default_hyper(DomainKind::Maze, Method::Chirp);
    let stream = sample_stream(&sim, 7, 8, hyper.budget)?;
    let mut agent = ChirpAgent::new(Cat::new(sim.schema().clone()), ChirpConfig::new(hyper), 7);
    agent.solve_stream(&sim, &stream, |agent, r| {
        println!(
            "task {}: solved {} in {} steps, {} options, {} leaves",
            r.task,
            r.solved,
            r.timesteps,
            agent.model.len(),
            agent.cat.leaf_count()
        );
        Ok(())
    })?;
    let path = std::env::temp_dir().join("chirp_stream_checkpoint.txt");
    std::fs::write(&path, agent.to_checkpoint()).map_err(|e| chirp::Error::io(&path, e))?;
    println!("checkpoint written to {}", path.display());
    Ok(())
}
