use std::io::Write;

use crate::cat::{Cat, NodeId};
use crate::error::{Error, Result};
use crate::Rng;

use super::{q_update, select_action, Budget, Environment, Greedy, Hyper, Policy, QTable};

/// Running mean and variance of one leaf's TD errors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> Option<f64> {
        (self.count >= 2).then(|| self.m2 / (self.count - 1) as f64)
    }
}

/// One training episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: u64,
    pub steps: usize,
    pub ret: f64,
    pub leaves: usize,
    pub epsilon: f64,
    pub success: bool,
}

/// Learning statistics of one learner.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearnStats {
    td: Vec<Welford>,
    pub episodes: Vec<EpisodeLog>,
    /// Environment steps consumed, evaluation included.
    pub timesteps: u64,
    /// Length of the most recent successful episode.
    pub recent_success_len: Option<usize>,
    /// Success rate of the most recent greedy evaluation.
    pub last_eval: Option<f64>,
}

impl LearnStats {
    fn record_td(&mut self, leaf: NodeId, td: f64) {
        let i = leaf.index();
        if i >= self.td.len() {
            self.td.resize(i + 1, Welford::default());
        }
        self.td[i].push(td);
    }

    /// Sample variance of the TD errors seen at `leaf` since the last reset.
    pub fn td_variance(&self, leaf: NodeId) -> Option<f64> {
        self.td.get(leaf.index()).and_then(Welford::variance)
    }

    pub fn td_count(&self, leaf: NodeId) -> u64 {
        self.td.get(leaf.index()).map_or(0, |w| w.count)
    }

    fn reset_td(&mut self) {
        self.td.clear();
    }
}

/// A tree, its Q-table and statistics, trained together.
#[derive(Debug, Clone)]
pub struct Learner {
    pub cat: Cat,
    pub q: QTable,
    pub stats: LearnStats,
    /// Training episodes run so far; drives the exploration schedule.
    pub episodes: u64,
}

impl Learner {
    pub fn new(cat: Cat, n_actions: usize) -> Self {
        let q = QTable::for_cat(&cat, n_actions);
        Learner {
            cat,
            q,
            stats: LearnStats::default(),
            episodes: 0,
        }
    }

    /// Learner over a tree refined until every leaf is atomic.
    pub fn flat(mut cat: Cat, n_actions: usize) -> Self {
        loop {
            let open: Vec<NodeId> = cat.leaves().filter(|&l| cat.is_splittable(l)).collect();
            if open.is_empty() {
                break;
            }
            for l in open {
                cat.refine(l).expect("splittable leaf");
            }
        }
        Learner::new(cat, n_actions)
    }

    pub fn policy(&self) -> Greedy<'_> {
        Greedy {
            cat: &self.cat,
            q: &self.q,
        }
    }

    /// Replaces the tree with a refinement of it, carrying Q rows over.
    pub fn adopt_cat(&mut self, cat: Cat) -> Result<()> {
        if !self.cat.same_lineage(&cat) {
            return Err(Error::Lineage("adopted tree is not a refinement".into()));
        }
        self.q.sync_with(&cat);
        self.cat = cat;
        self.stats.reset_td();
        Ok(())
    }

    /// Refines up to `k_cap` leaves whose TD-error variance is positive and at
    /// least the mean variance over leaves with two or more samples. Returns
    /// the refined leaves.
    pub fn refine_dispersed(&mut self, k_cap: usize) -> Vec<NodeId> {
        let scored: Vec<(NodeId, f64)> = self
            .cat
            .leaves()
            .filter_map(|l| self.stats.td_variance(l).map(|v| (l, v)))
            .collect();
        let mut refined = Vec::new();
        if !scored.is_empty() {
            let mean = scored.iter().map(|&(_, v)| v).sum::<f64>() / scored.len() as f64;
            let mut over: Vec<(NodeId, f64)> = scored
                .into_iter()
                .filter(|&(l, v)| v > 0.0 && v >= mean && self.cat.is_splittable(l))
                .collect();
            over.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            for (leaf, _) in over.into_iter().take(k_cap) {
                let kids = self.cat.refine(leaf).expect("splittable leaf");
                self.q.split(leaf, &kids);
                refined.push(leaf);
            }
        }
        self.stats.reset_td();
        refined
    }
}

/// Settings of one `run_catrl` call.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hyper: Hyper,
    /// Episode cap for this call; `None` runs until learned or out of budget.
    pub max_episodes: Option<usize>,
    pub refine: bool,
    /// Training episodes between greedy evaluations and refinements.
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub learned_threshold: f64,
    /// Fine-tuning an already trained policy: evaluate before training and
    /// explore at the minimum rate.
    pub warm: bool,
}

impl RunConfig {
    pub fn new(hyper: Hyper) -> Self {
        RunConfig {
            hyper,
            max_episodes: None,
            refine: true,
            eval_every: 50,
            eval_episodes: 20,
            learned_threshold: 0.9,
            warm: false,
        }
    }
}

/// Outcome of one `run_catrl` call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunReport {
    pub learned: bool,
    pub episodes: usize,
    pub steps: u64,
    pub refinements: usize,
}

/// Trains `learner` on `env` with ε-greedy Q-learning over its leaves.
///
/// Every `eval_every` episodes the greedy policy is evaluated; the run stops
/// once it succeeds at least `learned_threshold` of the time. Otherwise the
/// most dispersed leaves are refined. The run also stops at the episode cap
/// or when `budget` is spent.
pub fn run_catrl<E: Environment + ?Sized>(
    env: &E,
    learner: &mut Learner,
    cfg: &RunConfig,
    budget: &Budget,
    rng: &mut Rng,
) -> Result<RunReport> {
    cfg.hyper.validate()?;
    if budget.exhausted() {
        return Err(Error::InvalidBudget("no timesteps left".into()));
    }
    if cfg.eval_every == 0 || cfg.eval_episodes == 0 {
        return Err(Error::InvalidHyper(
            "evaluation window must be positive".into(),
        ));
    }
    let start = budget.used();
    let mut report = RunReport {
        learned: false,
        episodes: 0,
        steps: 0,
        refinements: 0,
    };
    let finish = |learner: &mut Learner, mut report: RunReport| {
        report.steps = budget.used() - start;
        learner.stats.timesteps += report.steps;
        Ok(report)
    };
    if cfg.warm && check_learned(env, learner, cfg, budget, rng) {
        report.learned = true;
        return finish(learner, report);
    }
    loop {
        if budget.exhausted() || cfg.max_episodes.is_some_and(|m| report.episodes >= m) {
            break;
        }
        let epsilon = if cfg.warm {
            cfg.hyper.min_epsilon
        } else {
            cfg.hyper.epsilon(learner.episodes)
        };
        train_episode(env, learner, epsilon, cfg, budget, rng)?;
        report.episodes += 1;
        if report.episodes.is_multiple_of(cfg.eval_every) {
            if check_learned(env, learner, cfg, budget, rng) {
                report.learned = true;
                break;
            }
            if cfg.refine {
                report.refinements += learner.refine_dispersed(cfg.hyper.k_cap).len();
            }
        }
    }
    finish(learner, report)
}

fn train_episode<E: Environment + ?Sized>(
    env: &E,
    learner: &mut Learner,
    epsilon: f64,
    cfg: &RunConfig,
    budget: &Budget,
    rng: &mut Rng,
) -> Result<()> {
    let mut state = env.reset(rng);
    let mut leaf = learner.cat.leaf_of(&state);
    let mut ret = 0.0;
    let mut steps = 0;
    let mut success = false;
    while steps < env.stepmax() && budget.try_spend() {
        let action = select_action(&learner.q, leaf, epsilon, rng);
        let fb = env.step(&state, action, rng)?;
        let next_leaf = learner.cat.leaf_of(&fb.next_state);
        let td = q_update(
            &mut learner.q,
            leaf,
            action,
            fb.reward,
            next_leaf,
            fb.done,
            &cfg.hyper,
        )?;
        learner.stats.record_td(leaf, td);
        ret += fb.reward;
        steps += 1;
        state = fb.next_state;
        leaf = next_leaf;
        if fb.done {
            success = true;
            break;
        }
    }
    if success {
        learner.stats.recent_success_len = Some(steps);
    }
    learner.stats.episodes.push(EpisodeLog {
        episode: learner.episodes,
        steps,
        ret,
        leaves: learner.cat.leaf_count(),
        epsilon,
        success,
    });
    learner.episodes += 1;
    Ok(())
}

fn check_learned<E: Environment + ?Sized>(
    env: &E,
    learner: &mut Learner,
    cfg: &RunConfig,
    budget: &Budget,
    rng: &mut Rng,
) -> bool {
    let n = cfg.eval_episodes;
    let allowed = n.saturating_sub((cfg.learned_threshold * n as f64).ceil() as usize);
    let eval = run_greedy(&learner.policy(), env, n, Some(allowed), budget, rng);
    if let Some(len) = eval.last_success_len {
        learner.stats.recent_success_len = Some(len);
    }
    let rate = eval.successes as f64 / n as f64;
    learner.stats.last_eval = Some(rate);
    rate >= cfg.learned_threshold
}

struct GreedyRuns {
    successes: usize,
    last_success_len: Option<usize>,
}

fn run_greedy<P: Policy + ?Sized, E: Environment + ?Sized>(
    policy: &P,
    env: &E,
    n_runs: usize,
    max_failures: Option<usize>,
    budget: &Budget,
    rng: &mut Rng,
) -> GreedyRuns {
    let mut out = GreedyRuns {
        successes: 0,
        last_success_len: None,
    };
    let mut failures = 0;
    for _ in 0..n_runs {
        let mut state = env.reset(rng);
        let mut reached = None;
        for t in 0..env.stepmax() {
            if !budget.try_spend() {
                break;
            }
            match env.step(&state, policy.act(&state), rng) {
                Ok(fb) => {
                    if fb.done {
                        reached = Some(t + 1);
                        break;
                    }
                    state = fb.next_state;
                }
                Err(_) => break,
            }
        }
        match reached {
            Some(len) => {
                out.successes += 1;
                out.last_success_len = Some(len);
            }
            None => {
                failures += 1;
                if max_failures.is_some_and(|m| failures > m) || budget.exhausted() {
                    break;
                }
            }
        }
    }
    out
}

/// Fraction of `n_runs` greedy episodes that reach the goal within the
/// environment's step limit. Runs cut short by the budget count as failures.
pub fn evaluate_policy<P: Policy + ?Sized, E: Environment + ?Sized>(
    policy: &P,
    env: &E,
    n_runs: usize,
    budget: &Budget,
    rng: &mut Rng,
) -> f64 {
    if n_runs == 0 {
        return 0.0;
    }
    run_greedy(policy, env, n_runs, None, budget, rng).successes as f64 / n_runs as f64
}

/// Writes per-episode training logs as CSV.
pub fn write_training_log<W: Write>(stats: &LearnStats, mut out: W) -> std::io::Result<()> {
    writeln!(out, "episode,steps,return,leaves,epsilon,success")?;
    for e in &stats.episodes {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            e.episode, e.steps, e.ret, e.leaves, e.epsilon, e.success as u8
        )?;
    }
    Ok(())
}
