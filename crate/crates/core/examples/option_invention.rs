//! Solves one taxi task from scratch and shows the options invented from the
//! learned policy, split where the passenger gets in and out.

use chirp::cat::Cat;
use chirp::chirp::{ChirpAgent, ChirpConfig};
use chirp::domains::{sample_stream, DomainKind, DomainSpec, GridMap, Simulator};
use chirp::harness::{default_hyper, Method};

fn main() -> chirp::Result<()> {
    let sim = DomainSpec::from_map(DomainKind::Taxi, GridMap::taxi(10, 10, 2)?)?;
    let mut hyper = default_hyper(DomainKind::Taxi, Method::Chirp);
    hyper.budget = 300_000;
    hyper.stepmax = 333;
    hyper.epsilon_decay = 0.9956;
    let stream = sample_stream(&sim, 0, 1, hyper.budget)?;
    let task = &stream.tasks[0];
    let schema = sim.schema();
    println!(
        "start {:?}, goal {}",
        task.initial_state.values(),
        task.goal.format(schema)
    );

    let mut agent = ChirpAgent::new(Cat::new(schema.clone()), ChirpConfig::new(hyper), 0);
    let r = agent.solve_task(&sim, task)?;
    println!(
        "solved {} in {} steps, {} options invented",
        r.solved, r.timesteps, r.options_invented
    );
    for trace in &r.inventions {
        let cuts: Vec<usize> = trace.endpoints.iter().map(|e| e.index).collect();
        println!(
            "rollout of {} states, context variables {:?}, endpoints at {:?}",
            trace.states.len(),
            trace.context_vars,
            cuts
        );
    }
    for o in agent.model.options() {
        println!(
            "option {}: {} (success {})",
            o.id,
            o.signature.describe(schema),
            o.success
        );
    }
    Ok(())
}
