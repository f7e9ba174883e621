//! Abstract options: invention from learned trajectories, the option MDP
//! used to train them, and the growing option model.

mod invent;

use std::collections::HashMap;

pub use invent::{
    identify_context_variables, identify_endpoints, invent_options, refinement_degree, rollout,
    ContextRule, Endpoint, Invention, InventionConfig, InventionTrace,
};

use crate::cat::AbstractState;
use crate::catrl::{Environment, Feedback, Learner};
use crate::domains::Simulator;
use crate::error::{Error, Result};
use crate::mdp::{Goal, Schema, State};
use crate::Rng;

/// Reward for reaching an option's termination set.
pub const INTRINSIC_REWARD: f64 = 500.0;

/// Declarative option: where it may start and where it ends.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSignature {
    pub initiation: Vec<AbstractState>,
    pub termination: Vec<AbstractState>,
}

impl OptionSignature {
    pub fn new(initiation: Vec<AbstractState>, termination: Vec<AbstractState>) -> Result<Self> {
        if initiation.is_empty() || termination.is_empty() {
            return Err(Error::InvalidSignature(
                "initiation and termination must be non-empty".into(),
            ));
        }
        Ok(OptionSignature {
            initiation,
            termination,
        })
    }

    pub fn can_start(&self, schema: &Schema, state: &State) -> bool {
        self.initiation
            .iter()
            .any(|r| r.contains_state(schema, state))
    }

    pub fn terminates(&self, schema: &Schema, state: &State) -> bool {
        self.termination
            .iter()
            .any(|r| r.contains_state(schema, state))
    }

    /// Equality as sets of regions.
    pub fn same_as(&self, other: &OptionSignature) -> bool {
        same_set(&self.initiation, &other.initiation) && self.same_termination(other)
    }

    /// Same termination set, and therefore the same option MDP rewards.
    pub fn same_termination(&self, other: &OptionSignature) -> bool {
        same_set(&self.termination, &other.termination)
    }

    pub fn describe(&self, schema: &Schema) -> String {
        let side = |rs: &[AbstractState]| {
            rs.iter()
                .map(|r| r.describe(schema))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        format!("{} -> {}", side(&self.initiation), side(&self.termination))
    }
}

fn same_set(a: &[AbstractState], b: &[AbstractState]) -> bool {
    a.len() == b.len() && a.iter().all(|r| b.contains(r)) && b.iter().all(|r| a.contains(r))
}

/// Where an option came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Provenance {
    pub task: usize,
    /// Trajectory indices `[start, end)` of the segment the option covers.
    pub segment: (usize, usize),
}

/// An option with its own tree and policy.
#[derive(Debug, Clone)]
pub struct AbstractOption {
    pub id: usize,
    pub signature: OptionSignature,
    pub learner: Learner,
    pub provenance: Provenance,
    /// Success rate of the latest greedy evaluation.
    pub success: f64,
    /// Execution step limit.
    pub stepmax: usize,
    /// Set after a failed execution; the option is fine-tuned before its next use.
    pub needs_finetune: bool,
}

/// Box containment of `a`'s termination in `b`'s initiation: `a` may be
/// followed by `b`.
pub fn composable(a: &AbstractOption, b: &AbstractOption) -> Result<bool> {
    if !a.learner.cat.same_lineage(&b.learner.cat) {
        return Err(Error::Lineage("options come from different trees".into()));
    }
    Ok(covers(&b.signature.initiation, &a.signature.termination))
}

/// Every region of `inner` lies within some region of `outer`.
pub fn covers(outer: &[AbstractState], inner: &[AbstractState]) -> bool {
    inner.iter().all(|t| outer.iter().any(|i| t.is_within(i)))
}

/// The collection of invented options.
#[derive(Debug, Clone, Default)]
pub struct OptionModel {
    options: Vec<AbstractOption>,
    next_id: usize,
    by_initiation: HashMap<AbstractState, Vec<usize>>,
    by_termination: HashMap<AbstractState, Vec<usize>>,
}

impl OptionModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn options(&self) -> &[AbstractOption] {
        &self.options
    }

    pub fn get(&self, id: usize) -> Option<&AbstractOption> {
        self.options.iter().find(|o| o.id == id)
    }

    pub fn get_mut(&mut self, id: usize) -> Option<&mut AbstractOption> {
        self.options.iter_mut().find(|o| o.id == id)
    }

    pub fn next_id(&self) -> usize {
        self.next_id
    }

    /// Adds `option` under a fresh id, or merges it into an existing option
    /// with the same signature (the higher evaluation success wins). Returns
    /// the id the option is stored under.
    pub fn add(&mut self, mut option: AbstractOption) -> usize {
        if let Some(existing) = self
            .options
            .iter_mut()
            .find(|o| o.signature.same_as(&option.signature))
        {
            if option.success > existing.success {
                option.id = existing.id;
                *existing = option;
            }
            return existing.id;
        }
        option.id = self.next_id;
        self.next_id += 1;
        let id = option.id;
        self.options.push(option);
        self.reindex();
        id
    }

    /// Restores an option under its recorded id.
    pub(crate) fn insert_raw(&mut self, option: AbstractOption) {
        self.next_id = self.next_id.max(option.id + 1);
        self.options.push(option);
        self.reindex();
    }

    pub(crate) fn set_next_id(&mut self, id: usize) {
        self.next_id = self.next_id.max(id);
    }

    fn reindex(&mut self) {
        self.by_initiation.clear();
        self.by_termination.clear();
        for o in &self.options {
            for r in &o.signature.initiation {
                self.by_initiation.entry(r.clone()).or_default().push(o.id);
            }
            for r in &o.signature.termination {
                self.by_termination.entry(r.clone()).or_default().push(o.id);
            }
        }
    }

    /// Ids of options listing `region` in their initiation set.
    pub fn starting_at(&self, region: &AbstractState) -> &[usize] {
        self.by_initiation.get(region).map_or(&[], Vec::as_slice)
    }

    /// Ids of options listing `region` in their termination set.
    pub fn ending_at(&self, region: &AbstractState) -> &[usize] {
        self.by_termination.get(region).map_or(&[], Vec::as_slice)
    }

    /// Options whose initiation set contains `state`, in id order.
    pub fn applicable(&self, schema: &Schema, state: &State) -> Vec<usize> {
        self.options
            .iter()
            .filter(|o| o.signature.can_start(schema, state))
            .map(|o| o.id)
            .collect()
    }
}

/// The MDP of one option: episodes start at a fixed state and end on
/// entering the termination set, which pays the intrinsic reward. Other
/// steps pay the domain's step or illegal-action reward.
pub struct OptionEnv<'a> {
    pub sim: &'a dyn Simulator,
    /// Goal of the surrounding task, passed through to the simulator.
    pub task_goal: &'a Goal,
    pub start: State,
    pub termination: Vec<AbstractState>,
    pub stepmax: usize,
}

impl OptionEnv<'_> {
    pub fn terminates(&self, state: &State) -> bool {
        let schema = self.sim.schema();
        self.termination
            .iter()
            .any(|r| r.contains_state(schema, state))
    }
}

impl Environment for OptionEnv<'_> {
    fn num_actions(&self) -> usize {
        self.sim.num_actions()
    }

    fn reset(&self, _rng: &mut Rng) -> State {
        self.start.clone()
    }

    fn step(&self, state: &State, action: usize, rng: &mut Rng) -> Result<Feedback> {
        let out = self.sim.step(self.task_goal, state, action, rng)?;
        let done = self.terminates(&out.next_state);
        let reward = if done {
            INTRINSIC_REWARD
        } else if out.illegal {
            out.reward
        } else {
            self.sim.step_reward()
        };
        Ok(Feedback {
            next_state: out.next_state,
            reward,
            done,
        })
    }

    fn stepmax(&self) -> usize {
        self.stepmax
    }
}
