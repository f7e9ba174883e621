//! Continual task solving: plan over learned options, learn the gaps with
//! CAT+RL, invent new options from what was learned and replan on failure.

mod checkpoint;

use std::collections::BTreeMap;

use rand::SeedableRng;

use crate::cat::{merge_cat, Cat, NodeId};
use crate::catrl::{run_catrl, Budget, Hyper, Learner, RunConfig};
use crate::domains::Simulator;
use crate::error::{Error, Result};
use crate::mdp::{Goal, State, Task, TaskStream};
use crate::options::{
    invent_options, AbstractOption, ContextRule, InventionConfig, InventionTrace, OptionEnv,
    OptionModel, OptionSignature,
};
use crate::planner::{
    compute_option_plan_excluding, invent_option_signature, OptionPlan, PlanStep, PlannerConfig,
};
use crate::Rng;

/// Stream id of the learning generator; task sampling uses stream 0.
pub const LEARNING_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ChirpConfig {
    pub hyper: Hyper,
    pub planner: PlannerConfig,
    pub context: ContextRule,
    /// Evaluation runs deciding whether a task is solved.
    pub eval_runs: usize,
    pub solved_threshold: f64,
    pub rollout_retries: usize,
}

impl ChirpConfig {
    pub fn new(hyper: Hyper) -> Self {
        ChirpConfig {
            hyper,
            planner: PlannerConfig::default(),
            context: ContextRule::default(),
            eval_runs: 100,
            solved_threshold: 0.9,
            rollout_retries: 10,
        }
    }

    fn invention(&self) -> InventionConfig {
        InventionConfig {
            hyper: self.hyper.clone(),
            context: self.context,
            rollout_retries: self.rollout_retries,
        }
    }
}

/// Option MDP of a signature or option starting at `start`.
pub fn make_option_mdp<'a>(
    sim: &'a dyn Simulator,
    task_goal: &'a Goal,
    start: State,
    signature: &OptionSignature,
    stepmax: usize,
) -> OptionEnv<'a> {
    OptionEnv {
        sim,
        task_goal,
        start,
        termination: signature.termination.clone(),
        stepmax,
    }
}

/// `s_factor` times the recent successful length, or `fallback` without one,
/// never above `cap` (the task's episode limit).
pub fn option_stepmax(
    recent_success_len: Option<usize>,
    s_factor: f64,
    fallback: usize,
    cap: usize,
) -> usize {
    let n = match recent_success_len {
        Some(len) => ((s_factor * len as f64).ceil() as usize).max(1),
        None => fallback,
    };
    n.min(cap)
}

/// Result of running one option.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    /// The termination set was entered.
    pub success: bool,
    pub end_state: State,
    pub steps: usize,
    /// The task goal was reached on the way.
    pub reached_goal: bool,
}

/// Runs `option`'s greedy policy from `state` until its termination set is
/// entered, the task goal is reached or its step limit runs out.
pub fn execute_option(
    option: &AbstractOption,
    sim: &dyn Simulator,
    task_goal: &Goal,
    state: &State,
    budget: &Budget,
    rng: &mut Rng,
) -> Result<Execution> {
    let schema = sim.schema();
    if !option.signature.can_start(schema, state) {
        return Err(Error::InapplicableOption);
    }
    let policy = option.learner.policy();
    let mut s = state.clone();
    let mut steps = 0;
    while steps < option.stepmax && budget.try_spend() {
        let out = sim.step(task_goal, &s, crate::catrl::Policy::act(&policy, &s), rng)?;
        steps += 1;
        s = out.next_state;
        if option.signature.terminates(schema, &s) || task_goal.satisfied_by(&s) {
            break;
        }
    }
    Ok(Execution {
        success: option.signature.terminates(schema, &s),
        reached_goal: task_goal.satisfied_by(&s),
        end_state: s,
        steps,
    })
}

/// One use of an option during a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptionOutcome {
    pub option: usize,
    pub success: bool,
    pub steps: usize,
}

/// Where a task's environment steps went.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepBreakdown {
    /// Training new signatures.
    pub learning: u64,
    pub finetuning: u64,
    /// Rollouts and fine-tuning during option invention.
    pub invention: u64,
    pub execution: u64,
    pub evaluation: u64,
}

#[derive(Debug, Clone)]
pub struct TaskResult {
    pub task: usize,
    pub solved: bool,
    /// Environment steps used, learning, execution and evaluation included.
    pub timesteps: u64,
    /// Success rate of the last full-plan evaluation.
    pub success_rate: f64,
    pub outcomes: Vec<OptionOutcome>,
    pub inventions: Vec<InventionTrace>,
    pub options_invented: usize,
    pub breakdown: StepBreakdown,
    /// Plan from the initial state, rendered with option ids and regions.
    pub policy: String,
}

/// Persistent learner state across a task stream.
#[derive(Debug, Clone)]
pub struct ChirpAgent {
    pub cat: Cat,
    pub model: OptionModel,
    pub rng: Rng,
    pub tasks_done: usize,
    pub config: ChirpConfig,
    /// Options left out of planning for the rest of the current task
    /// because fine-tuning them failed.
    pub suspended: Vec<usize>,
}

/// A signature learner kept for the rest of a task. Learners are shared by
/// signatures with the same termination set, whose option MDPs differ only
/// in the start state.
struct CachedLearner {
    signature: OptionSignature,
    learner: Learner,
    learned: bool,
}

enum Step {
    Continue,
    Replan,
}

impl ChirpAgent {
    pub fn new(cat: Cat, config: ChirpConfig, seed: u64) -> Self {
        let mut rng = Rng::seed_from_u64(seed);
        rng.set_stream(LEARNING_STREAM);
        ChirpAgent {
            cat,
            model: OptionModel::new(),
            rng,
            tasks_done: 0,
            config,
            suspended: Vec::new(),
        }
    }

    fn plan_from(&self, state: &State, goal: &Goal) -> Result<Option<OptionPlan>> {
        let goals = self.cat.goal_nodes(goal);
        if goals.is_empty() {
            return Ok(None);
        }
        compute_option_plan_excluding(
            &self.model,
            &self.cat,
            self.cat.leaf_of(state),
            &goals,
            self.config.planner,
            &self.suspended,
        )
    }

    fn adopt(&mut self, cat: &Cat) -> Result<()> {
        self.cat = merge_cat(&self.cat, cat)?;
        Ok(())
    }

    /// Solves one task within the per-task budget.
    pub fn solve_task(&mut self, sim: &dyn Simulator, task: &Task) -> Result<TaskResult> {
        self.solve_task_with(sim, task, &Budget::new(self.config.hyper.budget))
    }

    pub fn solve_task_with(
        &mut self,
        sim: &dyn Simulator,
        task: &Task,
        budget: &Budget,
    ) -> Result<TaskResult> {
        if budget.remaining() == 0 {
            return Err(Error::InvalidBudget(
                "per-task budget must be positive".into(),
            ));
        }
        let goal = &task.goal;
        self.cat.align_to_goal(goal);
        self.suspended.clear();
        let mut result = TaskResult {
            task: self.tasks_done,
            solved: false,
            timesteps: 0,
            success_rate: 0.0,
            outcomes: Vec::new(),
            inventions: Vec::new(),
            options_invented: 0,
            breakdown: StepBreakdown::default(),
            policy: String::new(),
        };
        let mut cache: Vec<CachedLearner> = Vec::new();
        let mut s = task.initial_state.clone();
        let mut force_cold = false;
        let mut stalls = 0;
        while !budget.exhausted() {
            if goal.satisfied_by(&s) {
                let before = budget.used();
                let rate = self.evaluate_task(sim, task, budget)?;
                result.breakdown.evaluation += budget.used() - before;
                result.success_rate = rate;
                if rate >= self.config.solved_threshold {
                    result.solved = true;
                    break;
                }
                s = task.initial_state.clone();
                continue;
            }
            let used = budget.used();
            let plan = if force_cold {
                None
            } else {
                self.plan_from(&s, goal)?
            };
            let steps = match plan {
                Some(p) => p.steps,
                None => vec![PlanStep::Signature(invent_option_signature(
                    &self.cat, &s, goal,
                )?)],
            };
            for step in steps {
                if budget.exhausted() || goal.satisfied_by(&s) {
                    break;
                }
                let outcome = match step {
                    PlanStep::Option(id) => {
                        self.run_option(id, sim, goal, &mut s, budget, &mut result)?
                    }
                    PlanStep::Signature(sig) => {
                        self.run_signature(sig, sim, goal, &mut s, budget, &mut cache, &mut result)?
                    }
                };
                if matches!(outcome, Step::Replan) {
                    break;
                }
            }
            if budget.used() == used {
                if force_cold {
                    stalls += 1;
                    if stalls >= 2 {
                        break;
                    }
                }
                force_cold = true;
            } else {
                force_cold = false;
                stalls = 0;
            }
        }
        result.timesteps = budget.used();
        result.policy = match self.plan_from(&task.initial_state, goal)? {
            Some(p) => self.describe_plan(&p),
            None => "no plan".into(),
        };
        self.tasks_done += 1;
        Ok(result)
    }

    fn run_option(
        &mut self,
        id: usize,
        sim: &dyn Simulator,
        goal: &Goal,
        s: &mut State,
        budget: &Budget,
        result: &mut TaskResult,
    ) -> Result<Step> {
        let needs = self
            .model
            .get(id)
            .ok_or(Error::InapplicableOption)?
            .needs_finetune;
        if needs {
            let before = budget.used();
            self.finetune(id, sim, goal, s, budget)?;
            result.breakdown.finetuning += budget.used() - before;
            if budget.exhausted() || self.suspended.contains(&id) {
                return Ok(Step::Replan);
            }
        }
        let option = self.model.get(id).expect("checked above");
        let exec = execute_option(option, sim, goal, s, budget, &mut self.rng)?;
        result.breakdown.execution += exec.steps as u64;
        result.outcomes.push(OptionOutcome {
            option: id,
            success: exec.success,
            steps: exec.steps,
        });
        *s = exec.end_state;
        if exec.success || exec.reached_goal {
            Ok(Step::Continue)
        } else {
            if let Some(o) = self.model.get_mut(id) {
                o.needs_finetune = true;
            }
            Ok(Step::Replan)
        }
    }

    fn finetune(
        &mut self,
        id: usize,
        sim: &dyn Simulator,
        goal: &Goal,
        s: &State,
        budget: &Budget,
    ) -> Result<()> {
        let hyper = self.config.hyper.clone();
        let option = self.model.get_mut(id).expect("known option");
        let env = make_option_mdp(sim, goal, s.clone(), &option.signature, option.stepmax);
        let mut run = RunConfig::new(hyper.clone());
        run.warm = true;
        run.max_episodes = Some(hyper.e_max);
        option.learner.stats = Default::default();
        let report = run_catrl(&env, &mut option.learner, &run, budget, &mut self.rng)?;
        option.success = option.learner.stats.last_eval.unwrap_or(option.success);
        option.stepmax = option_stepmax(
            option.learner.stats.recent_success_len,
            hyper.s_factor,
            option.stepmax,
            hyper.stepmax,
        );
        option.needs_finetune = !report.learned;
        if !report.learned {
            self.suspended.push(id);
        }
        let cat = option.learner.cat.clone();
        self.adopt(&cat)
    }

    #[allow(clippy::too_many_arguments)]
    fn run_signature(
        &mut self,
        sig: OptionSignature,
        sim: &dyn Simulator,
        goal: &Goal,
        s: &mut State,
        budget: &Budget,
        cache: &mut Vec<CachedLearner>,
        result: &mut TaskResult,
    ) -> Result<Step> {
        let schema = sim.schema();
        if sig.terminates(schema, s) {
            return Ok(Step::Continue);
        }
        let hyper = self.config.hyper.clone();
        let pos = match cache
            .iter()
            .position(|c| c.signature.same_termination(&sig))
        {
            Some(p) => p,
            None => {
                cache.push(CachedLearner {
                    signature: sig.clone(),
                    learner: Learner::new(self.cat.clone(), sim.num_actions()),
                    learned: false,
                });
                cache.len() - 1
            }
        };
        let entry = &mut cache[pos];
        if !entry.learner.cat.same_lineage(&self.cat) {
            return Err(Error::Lineage(
                "signature learner left the universal lineage".into(),
            ));
        }
        let env = make_option_mdp(sim, goal, s.clone(), &sig, hyper.stepmax);
        let mut run = RunConfig::new(hyper.clone());
        run.max_episodes = Some(hyper.e_max);
        run.warm = entry.learned;
        let learner = &mut entry.learner;
        let report = run_catrl(&env, learner, &run, budget, &mut self.rng)?;
        entry.learned |= report.learned;
        result.breakdown.learning += report.steps;
        if !report.learned {
            return Ok(Step::Replan);
        }
        let before = budget.used();
        let invention = invent_options(
            learner,
            &env,
            &self.config.invention(),
            self.tasks_done,
            budget,
            &mut self.rng,
        );
        result.breakdown.invention += budget.used() - before;
        let invention = match invention {
            Ok(inv) => inv,
            Err(Error::RolloutFailed(_)) => return Ok(Step::Replan),
            Err(e) => return Err(e),
        };
        let cat = cache[pos].learner.cat.clone();
        self.adopt(&cat)?;
        let mut chain = Vec::new();
        for o in invention.options {
            self.adopt(&o.learner.cat)?;
            chain.push(self.model.add(o));
            result.options_invented += 1;
        }
        result.inventions.push(invention.trace);
        for id in chain {
            if budget.exhausted() || goal.satisfied_by(s) {
                break;
            }
            let applicable = self
                .model
                .get(id)
                .is_some_and(|o| o.signature.can_start(schema, s));
            if !applicable {
                return Ok(Step::Replan);
            }
            if let Step::Replan = self.run_option(id, sim, goal, s, budget, result)? {
                return Ok(Step::Replan);
            }
        }
        Ok(Step::Continue)
    }

    /// Success rate of the planning policy from the task's initial state
    /// over the configured number of runs. Each run follows the plan from
    /// its current abstract state and replans after a failed option or on
    /// reaching a signature whose termination it is not already in, up to
    /// a fixed number of plans. Options that fail are flagged for
    /// fine-tuning. Stops early once the solved threshold is out of reach.
    fn evaluate_task(&mut self, sim: &dyn Simulator, task: &Task, budget: &Budget) -> Result<f64> {
        const PLANS_PER_RUN: usize = 8;
        let runs = self.config.eval_runs;
        let schema = sim.schema();
        let allowed =
            runs.saturating_sub((self.config.solved_threshold * runs as f64).ceil() as usize);
        let mut plans: BTreeMap<NodeId, Option<Vec<PlanStep>>> = BTreeMap::new();
        let (mut successes, mut failures) = (0, 0);
        for _ in 0..runs {
            let mut s = task.initial_state.clone();
            for _ in 0..PLANS_PER_RUN {
                if task.goal.satisfied_by(&s) || budget.exhausted() {
                    break;
                }
                let leaf = self.cat.leaf_of(&s);
                if let std::collections::btree_map::Entry::Vacant(e) = plans.entry(leaf) {
                    let plan = self.plan_from(&s, &task.goal)?.map(|p| p.steps);
                    e.insert(plan);
                }
                let Some(steps) = plans[&leaf].clone() else {
                    break;
                };
                let mut moved = false;
                for step in steps {
                    if task.goal.satisfied_by(&s) || budget.exhausted() {
                        break;
                    }
                    let id = match step {
                        PlanStep::Option(id) => id,
                        PlanStep::Signature(sig) if sig.terminates(schema, &s) => continue,
                        PlanStep::Signature(_) => break,
                    };
                    let option = self.model.get(id).expect("planned option");
                    if !option.signature.can_start(schema, &s) {
                        break;
                    }
                    let exec = execute_option(option, sim, &task.goal, &s, budget, &mut self.rng)?;
                    s = exec.end_state;
                    moved |= exec.steps > 0;
                    if !exec.success && !exec.reached_goal {
                        if let Some(o) = self.model.get_mut(id) {
                            o.needs_finetune = true;
                        }
                        break;
                    }
                }
                if !moved {
                    break;
                }
            }
            if task.goal.satisfied_by(&s) {
                successes += 1;
            } else {
                failures += 1;
                if failures > allowed || budget.exhausted() {
                    break;
                }
            }
        }
        Ok(successes as f64 / runs as f64)
    }

    pub fn describe_plan(&self, plan: &OptionPlan) -> String {
        let schema = self.cat.schema();
        if plan.steps.is_empty() {
            return "already at goal".into();
        }
        plan.steps
            .iter()
            .map(|s| match s {
                PlanStep::Option(id) => match self.model.get(*id) {
                    Some(o) => format!("option {id}: {}", o.signature.describe(schema)),
                    None => format!("option {id}"),
                },
                PlanStep::Signature(sig) => format!("learn: {}", sig.describe(schema)),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Solves every task of `stream` in order. `after_task` runs after each
    /// task, for example to write a checkpoint.
    pub fn solve_stream<F>(
        &mut self,
        sim: &dyn Simulator,
        stream: &TaskStream,
        mut after_task: F,
    ) -> Result<Vec<TaskResult>>
    where
        F: FnMut(&ChirpAgent, &TaskResult) -> Result<()>,
    {
        stream.validate()?;
        let mut out = Vec::new();
        while self.tasks_done < stream.tasks.len() {
            let task = &stream.tasks[self.tasks_done];
            let r = self.solve_task_with(sim, task, &Budget::new(stream.per_task_budget))?;
            after_task(self, &r)?;
            out.push(r);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{make_domain, DomainKind, DomainSpec, GridMap, SizeConfig, EAST};
    use crate::mdp::Constraint;
    use crate::options::Provenance;

    fn corridor(width: usize) -> DomainSpec {
        make_domain(DomainKind::Maze, SizeConfig::Custom { width, height: 1 }).unwrap()
    }

    fn east_option(d: &DomainSpec, to: usize, stepmax: usize) -> AbstractOption {
        let mut cat = Cat::new(d.schema().clone());
        let goal = Goal::new(vec![Constraint::interval(0, to as f64, to as f64 + 1.0)]);
        cat.align_to_goal(&goal);
        let term = cat.goal_nodes(&goal);
        let mut learner = Learner::new(cat.clone(), d.num_actions());
        for l in learner.cat.leaves().collect::<Vec<_>>() {
            learner.q.set(l, EAST, 1.0);
        }
        AbstractOption {
            id: 0,
            signature: OptionSignature::new(
                vec![cat.region(cat.root()).clone()],
                term.iter().map(|&n| cat.region(n).clone()).collect(),
            )
            .unwrap(),
            learner,
            provenance: Provenance::default(),
            success: 1.0,
            stepmax,
            needs_finetune: false,
        }
    }

    /// Task goal at the corridor's east end, beyond every test termination.
    fn far_goal(width: usize) -> Goal {
        Goal::new(vec![Constraint::interval(
            0,
            width as f64 - 1.0,
            width as f64,
        )])
    }

    #[test]
    fn option_mdp_stepmax_from_recent_success() {
        assert_eq!(option_stepmax(Some(40), 10.0, 1000, 1000), 400);
        assert_eq!(option_stepmax(None, 10.0, 1000, 1000), 1000);
        assert_eq!(option_stepmax(Some(127), 10.0, 500, 500), 500);
    }

    #[test]
    fn option_mdp_rewards() {
        let d = make_domain(DomainKind::Taxi, SizeConfig::Desk).unwrap();
        let goal = Goal::default();
        let start = d.schema().state(vec![2.5, 2.5, 1.0, 0.0]).unwrap();
        let term = crate::cat::AbstractState::full(d.schema());
        let far = OptionSignature::new(
            vec![term.clone()],
            vec![{
                let mut cat = Cat::new(d.schema().clone());
                let kids = cat.refine(cat.root()).unwrap();
                cat.region(kids[kids.len() - 1]).clone()
            }],
        )
        .unwrap();
        let env = make_option_mdp(&d, &goal, start.clone(), &far, 10);
        let mut rng = Rng::seed_from_u64(0);
        let fb =
            crate::catrl::Environment::step(&env, &start, crate::domains::WEST, &mut rng).unwrap();
        assert_eq!(fb.reward, -1.0);
        assert!(!fb.done);
        let here = OptionSignature::new(vec![term.clone()], vec![term]).unwrap();
        let env = make_option_mdp(&d, &goal, start.clone(), &here, 10);
        let fb =
            crate::catrl::Environment::step(&env, &start, crate::domains::WEST, &mut rng).unwrap();
        assert_eq!((fb.reward, fb.done), (500.0, true));
    }

    #[test]
    fn deterministic_option_runs_to_termination() {
        let d = corridor(5);
        let o = east_option(&d, 3, 100);
        let start = d.schema().state(vec![0.5, 0.5]).unwrap();
        let mut rng = Rng::seed_from_u64(4);
        let e = execute_option(
            &o,
            &d,
            &far_goal(d.map().width()),
            &start,
            &Budget::unlimited(),
            &mut rng,
        )
        .unwrap();
        assert!(e.success);
        assert_eq!(d.cell_of(&e.end_state), (3, 0));
    }

    #[test]
    fn timeout_reports_last_state() {
        let d = corridor(5);
        let o = east_option(&d, 4, 1);
        let start = d.schema().state(vec![0.5, 0.5]).unwrap();
        let mut rng = Rng::seed_from_u64(4);
        let e = execute_option(
            &o,
            &d,
            &far_goal(d.map().width()),
            &start,
            &Budget::unlimited(),
            &mut rng,
        )
        .unwrap();
        assert!(!e.success);
        assert_eq!(e.steps, 1);
        assert!(d.cell_of(&e.end_state).0 <= 1);
    }

    #[test]
    fn inapplicable_option_rejected() {
        let d = corridor(5);
        let mut o = east_option(&d, 3, 10);
        o.signature.initiation = o.signature.termination.clone();
        let start = d.schema().state(vec![0.5, 0.5]).unwrap();
        let mut rng = Rng::seed_from_u64(4);
        assert!(matches!(
            execute_option(
                &o,
                &d,
                &far_goal(d.map().width()),
                &start,
                &Budget::unlimited(),
                &mut rng
            ),
            Err(Error::InapplicableOption)
        ));
    }

    /// Probability of at least `k` advances within `n` steps when each step
    /// advances with probability `p`, by dynamic programming over the chain.
    fn absorption(p: f64, k: usize, n: usize) -> f64 {
        let mut dist = vec![0.0; k + 1];
        dist[0] = 1.0;
        for _ in 0..n {
            let mut next = vec![0.0; k + 1];
            next[k] = dist[k];
            for i in 0..k {
                next[i] += dist[i] * (1.0 - p);
                next[i + 1] += dist[i] * p;
            }
            dist = next;
        }
        dist[k]
    }

    #[test]
    fn slip_corridor_success_matches_absorption() {
        let d = corridor(6);
        let o = east_option(&d, 3, 5);
        let start = d.schema().state(vec![0.5, 0.5]).unwrap();
        let expected = absorption(0.8, 3, 5);
        let mut rng = Rng::seed_from_u64(11);
        let b = Budget::unlimited();
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| {
                execute_option(&o, &d, &far_goal(d.map().width()), &start, &b, &mut rng)
                    .unwrap()
                    .success
            })
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - expected).abs() < 0.02, "{rate} vs {expected}");
    }

    fn hyper() -> Hyper {
        Hyper {
            epsilon_decay: 0.99,
            stepmax: 60,
            e_max: 300,
            budget: 200_000,
            ..Hyper::default()
        }
    }

    #[test]
    fn task_at_goal_is_solved_for_free() {
        let d = corridor(4);
        let task = Task {
            initial_state: d.schema().state(vec![2.5, 0.5]).unwrap(),
            goal: Goal::new(vec![Constraint::interval(0, 2.0, 3.0)]),
            reward_id: "maze".into(),
        };
        let mut agent = ChirpAgent::new(Cat::new(d.schema().clone()), ChirpConfig::new(hyper()), 1);
        let r = agent.solve_task(&d, &task).unwrap();
        assert!(r.solved);
        assert_eq!(r.timesteps, 0);
    }

    #[test]
    fn small_maze_tasks_are_solved_and_reused() {
        let map: GridMap = "......\n.####.\n......\n".parse().unwrap();
        let d = DomainSpec::from_map(DomainKind::Maze, map).unwrap();
        let stream = crate::domains::sample_stream(&d, 3, 3, 200_000).unwrap();
        let mut agent = ChirpAgent::new(Cat::new(d.schema().clone()), ChirpConfig::new(hyper()), 3);
        let mut leaves = agent.cat.leaf_count();
        let mut options = 0;
        let results = agent
            .solve_stream(&d, &stream, |a, r| {
                assert!(a.cat.leaf_count() >= leaves);
                assert!(a.model.len() >= options);
                assert!(r.timesteps <= stream.per_task_budget);
                leaves = a.cat.leaf_count();
                options = a.model.len();
                Ok(())
            })
            .unwrap();
        assert_eq!(results.len(), 3);
        assert!(results.iter().all(|r| r.solved), "{results:#?}");
        assert!(!agent.model.is_empty());
    }

    #[test]
    fn stream_is_reproducible() {
        let d = corridor(6);
        let stream = crate::domains::sample_stream(&d, 8, 3, 100_000).unwrap();
        let run = || {
            let mut agent =
                ChirpAgent::new(Cat::new(d.schema().clone()), ChirpConfig::new(hyper()), 5);
            agent
                .solve_stream(&d, &stream, |_, _| Ok(()))
                .unwrap()
                .iter()
                .map(|r| (r.solved, r.timesteps, r.options_invented))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
