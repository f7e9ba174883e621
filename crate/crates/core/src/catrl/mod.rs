//! Q-learning over the leaves of an abstraction tree, refining leaves whose
//! TD errors are most dispersed.

mod learner;
mod qtable;

use std::cell::Cell;

pub use learner::{
    evaluate_policy, run_catrl, write_training_log, EpisodeLog, LearnStats, Learner, RunConfig,
    RunReport,
};
pub use qtable::{q_update, QTable};

use rand::Rng as _;

use crate::cat::{Cat, NodeId};
use crate::domains::Simulator;
use crate::error::{Error, Result};
use crate::mdp::{State, Task};
use crate::Rng;

/// Learning hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    pub alpha: f64,
    pub gamma: f64,
    /// Per-episode multiplicative exploration decay.
    pub epsilon_decay: f64,
    pub min_epsilon: f64,
    /// Episode step limit for whole tasks.
    pub stepmax: usize,
    /// Most leaves refined per refinement window.
    pub k_cap: usize,
    /// Option step limit as a multiple of the last successful length.
    pub s_factor: f64,
    /// Episode cap when training an option.
    pub e_max: usize,
    pub delta_thre: f64,
    pub sigma_thre: f64,
    /// Timestep budget per task.
    pub budget: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            alpha: 0.05,
            gamma: 0.99,
            epsilon_decay: 0.997,
            min_epsilon: 0.05,
            stepmax: 500,
            k_cap: 2,
            s_factor: 10.0,
            e_max: 500,
            delta_thre: 0.0,
            sigma_thre: 0.95,
            budget: 1_500_000,
        }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidHyper(m.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.min_epsilon > 0.0 && self.min_epsilon <= 1.0) {
            return bad("min_epsilon must be in (0, 1]");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must be in (0, 1]");
        }
        if self.k_cap < 1 {
            return bad("k_cap must be at least 1");
        }
        if self.stepmax == 0 || self.e_max == 0 {
            return bad("stepmax and e_max must be positive");
        }
        if !(0.0..=1.0).contains(&self.sigma_thre) || self.delta_thre < 0.0 {
            return bad("thresholds out of range");
        }
        if self.s_factor <= 0.0 {
            return bad("s_factor must be positive");
        }
        Ok(())
    }

    /// Exploration rate for the given episode count.
    pub fn epsilon(&self, episode: u64) -> f64 {
        self.epsilon_decay
            .powf(episode as f64)
            .max(self.min_epsilon)
    }
}

/// Counts environment steps against a fixed limit.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: Cell<u64>,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: Cell::new(0),
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(u64::MAX)
    }

    /// Claims one step; false once the limit is reached.
    #[inline]
    pub fn try_spend(&self) -> bool {
        let u = self.used.get();
        if u >= self.limit {
            return false;
        }
        self.used.set(u + 1);
        true
    }

    pub fn used(&self) -> u64 {
        self.used.get()
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.used.get()
    }

    pub fn exhausted(&self) -> bool {
        self.used.get() >= self.limit
    }
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub next_state: State,
    pub reward: f64,
    pub done: bool,
}

/// Episodic view of an MDP, either a whole task or an option sub-problem.
pub trait Environment {
    fn num_actions(&self) -> usize;
    fn reset(&self, rng: &mut Rng) -> State;
    fn step(&self, state: &State, action: usize, rng: &mut Rng) -> Result<Feedback>;
    fn stepmax(&self) -> usize;
}

/// A task of a simulator, always reset to the task's initial state.
pub struct TaskEnv<'a> {
    pub sim: &'a dyn Simulator,
    pub task: &'a Task,
    pub stepmax: usize,
}

impl Environment for TaskEnv<'_> {
    fn num_actions(&self) -> usize {
        self.sim.num_actions()
    }

    fn reset(&self, _rng: &mut Rng) -> State {
        self.task.initial_state.clone()
    }

    fn step(&self, state: &State, action: usize, rng: &mut Rng) -> Result<Feedback> {
        let out = self.sim.step(&self.task.goal, state, action, rng)?;
        Ok(Feedback {
            next_state: out.next_state,
            reward: out.reward,
            done: out.done,
        })
    }

    fn stepmax(&self) -> usize {
        self.stepmax
    }
}

/// Maps states to actions.
pub trait Policy {
    fn act(&self, state: &State) -> usize;
}

/// Greedy policy of a Q-table over a tree's leaves.
#[derive(Debug, Clone, Copy)]
pub struct Greedy<'a> {
    pub cat: &'a Cat,
    pub q: &'a QTable,
}

impl Policy for Greedy<'_> {
    fn act(&self, state: &State) -> usize {
        self.q.argmax(self.cat.leaf_of(state))
    }
}

/// ε-greedy choice over the leaf's row; greedy ties go to the lowest index.
pub fn select_action(q: &QTable, leaf: NodeId, epsilon: f64, rng: &mut Rng) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.n_actions())
    } else {
        q.argmax(leaf)
    }
}
