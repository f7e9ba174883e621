//! Learns one four-rooms task with Q-learning over an abstraction tree that
//! refines itself where TD errors disperse.

use rand::SeedableRng;

use chirp::cat::Cat;
use chirp::catrl::{evaluate_policy, run_catrl, Budget, Learner, RunConfig, TaskEnv};
use chirp::domains::{make_domain, sample_stream, DomainKind, Simulator, SizeConfig};
use chirp::harness::{default_hyper, Method};
use chirp::Rng;

fn main() -> chirp::Result<()> {
    let sim = make_domain(DomainKind::FourRooms, SizeConfig::Desk)?;
    let hyper = default_hyper(DomainKind::FourRooms, Method::CatrlBaseline);
    let stream = sample_stream(&sim, 4, 1, hyper.budget)?;
    let task = &stream.tasks[0];
    println!(
        "start {:?}, goal {}",
        task.initial_state.values(),
        task.goal.format(sim.schema())
    );

    let mut cat = Cat::new(sim.schema().clone());
    cat.align_to_goal(&task.goal);
    let mut learner = Learner::new(cat, sim.num_actions());
    let env = TaskEnv {
        sim: &sim,
        task,
        stepmax: hyper.stepmax,
    };
    let budget = Budget::new(hyper.budget);
    let mut rng = Rng::seed_from_u64(4);
    let report = run_catrl(
        &env,
        &mut learner,
        &RunConfig::new(hyper),
        &budget,
        &mut rng,
    )?;
    println!(
        "learned {} after {} episodes and {} steps, {} refinements, {} leaves",
        report.learned,
        report.episodes,
        report.steps,
        report.refinements,
        learner.cat.leaf_count()
    );
    let rate = evaluate_policy(&learner.policy(), &env, 100, &Budget::unlimited(), &mut rng);
    println!("greedy success rate over 100 runs: {rate}");
    Ok(())
}
