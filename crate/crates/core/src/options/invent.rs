use crate::cat::{delta_distance, make_ccat, sigma_distance, CCat, Cat, NodeId, SigmaWeights};
use crate::catrl::{run_catrl, Budget, Environment, Hyper, Learner, Policy, RunConfig};
use crate::chirp::option_stepmax;
use crate::error::{Error, Result};
use crate::mdp::{State, Trajectory, Transition, VarDomain};
use crate::Rng;

use super::{AbstractOption, OptionEnv, OptionSignature, Provenance};

/// Greedy episode of `policy` that reaches the goal, retried with fresh
/// randomness up to `retries` times.
pub fn rollout<P: Policy + ?Sized, E: Environment + ?Sized>(
    policy: &P,
    env: &E,
    retries: usize,
    budget: &Budget,
    rng: &mut Rng,
) -> Result<Trajectory> {
    for _ in 0..retries.max(1) {
        let mut traj = Trajectory::default();
        let mut state = env.reset(rng);
        for _ in 0..env.stepmax() {
            if !budget.try_spend() {
                return Err(Error::RolloutFailed(retries));
            }
            let action = policy.act(&state);
            let fb = env.step(&state, action, rng)?;
            traj.push(Transition {
                state: state.clone(),
                action,
                reward: fb.reward,
                next_state: fb.next_state.clone(),
                done: fb.done,
            });
            state = fb.next_state;
            if fb.done {
                return Ok(traj);
            }
        }
    }
    Err(Error::RolloutFailed(retries))
}

/// `1 - mean over leaves of (leaf width on var / domain width)`.
pub fn refinement_degree(cat: &Cat, var: usize) -> f64 {
    let full = cat.region(cat.root()).interval(var).width();
    let (sum, n) = cat.leaves().fold((0.0, 0usize), |(s, n), l| {
        (s + cat.region(l).interval(var).width() / full, n + 1)
    });
    1.0 - sum / n as f64
}

/// Highest degree a variable can reach, when every leaf is atomic on it.
fn max_refinement_degree(cat: &Cat, var: usize) -> f64 {
    let full = cat.region(cat.root()).interval(var).width();
    let atom = match cat.schema().var(var).domain() {
        VarDomain::Discrete { .. } => 1.0,
        VarDomain::Continuous { grid, .. } => grid.unwrap_or(cat.config().min_resolution),
    };
    (1.0 - atom / full).max(0.0)
}

/// Thresholds for picking context variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextRule {
    /// A variable changes rarely when its change frequency is below this
    /// multiple of the mean frequency over all variables.
    pub frequency_factor: f64,
}

impl Default for ContextRule {
    fn default() -> Self {
        ContextRule {
            frequency_factor: 0.5,
        }
    }
}

/// Variables that change rarely along `traj` yet are refined in `cat`
/// relatively more than the other rarely changing ones.
///
/// Refinement is compared as a fraction of each variable's highest
/// achievable degree, so binary flags and wide coordinates are comparable.
pub fn identify_context_variables(cat: &Cat, traj: &Trajectory, rule: ContextRule) -> Vec<usize> {
    let n_vars = cat.schema().len();
    if traj.is_empty() || n_vars == 0 {
        return Vec::new();
    }
    let freq: Vec<f64> = (0..n_vars)
        .map(|v| {
            let changes = traj
                .transitions
                .iter()
                .filter(|t| t.state.get(v) != t.next_state.get(v))
                .count();
            changes as f64 / traj.len() as f64
        })
        .collect();
    let mean_freq = freq.iter().sum::<f64>() / n_vars as f64;
    let candidates: Vec<(usize, f64)> = (0..n_vars)
        .filter(|&v| freq[v] < rule.frequency_factor * mean_freq)
        .filter_map(|v| {
            let max = max_refinement_degree(cat, v);
            let d = refinement_degree(cat, v);
            (d > 0.0 && max > 0.0).then(|| (v, d / max))
        })
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    let mean = candidates.iter().map(|c| c.1).sum::<f64>() / candidates.len() as f64;
    candidates
        .into_iter()
        .filter(|&(_, d)| d >= mean - 1e-12)
        .map(|(v, _)| v)
        .collect()
}

/// An option endpoint: the node entered at trajectory index `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoint {
    pub index: usize,
    pub node: NodeId,
}

/// Splits a trajectory `states[0..=n]` into option endpoints.
///
/// Both sides of every transition whose context-specific distance exceeds
/// `delta_thre` become endpoints; the predecessor is dated from when its leaf
/// was entered. Each resulting segment is then cut again where a leaf change
/// has a context-independent distance above `sigma_thre` times the segment's
/// largest one. The first endpoint is the start leaf and the last is
/// `final_node`.
pub fn identify_endpoints(
    cat: &Cat,
    ccats: &[CCat<'_>],
    states: &[State],
    delta_thre: f64,
    sigma_thre: f64,
    final_node: NodeId,
) -> Result<Vec<Endpoint>> {
    if states.len() < 2 {
        return Err(Error::Misaligned(
            "trajectory needs at least one transition".into(),
        ));
    }
    if ccats.len() != states.len() {
        return Err(Error::Misaligned(format!(
            "{} context views for {} states",
            ccats.len(),
            states.len()
        )));
    }
    let n = states.len() - 1;
    let leaves: Vec<NodeId> = states.iter().map(|s| cat.leaf_of(s)).collect();
    let mut run_start = vec![0; n + 1];
    for i in 1..=n {
        run_start[i] = if leaves[i] == leaves[i - 1] {
            run_start[i - 1]
        } else {
            i
        };
    }

    let mut raw = vec![Endpoint {
        index: 0,
        node: leaves[0],
    }];
    for i in 0..n {
        if f64::from(delta_distance(&ccats[i], &ccats[i + 1])?) > delta_thre {
            raw.push(Endpoint {
                index: run_start[i],
                node: leaves[i],
            });
            if i + 1 < n {
                raw.push(Endpoint {
                    index: i + 1,
                    node: leaves[i + 1],
                });
            }
        }
    }
    raw.push(Endpoint {
        index: n,
        node: final_node,
    });
    let coarse = normalise(raw);

    let w = SigmaWeights::default();
    let mut out = Vec::new();
    for pair in coarse.windows(2) {
        let (k, m) = (pair[0].index, pair[1].index);
        out.push(pair[0]);
        let mut cuts = Vec::new();
        let mut sigma_max: f64 = 0.0;
        for t in k + 1..m {
            if leaves[t] != leaves[t - 1] {
                let s = sigma_distance(cat, leaves[t - 1], leaves[t], w)?;
                sigma_max = sigma_max.max(s);
                cuts.push((t, s));
            }
        }
        for (t, s) in cuts {
            if s > sigma_thre * sigma_max {
                out.push(Endpoint {
                    index: t,
                    node: leaves[t],
                });
            }
        }
    }
    out.push(*coarse.last().expect("at least two endpoints"));
    Ok(normalise(out))
}

/// Orders endpoints by index and drops consecutive repeats of a node. Of two
/// endpoints at one index the later one (the final node) wins.
fn normalise(mut eps: Vec<Endpoint>) -> Vec<Endpoint> {
    eps.sort_by_key(|e| e.index);
    let mut out: Vec<Endpoint> = Vec::with_capacity(eps.len());
    for e in eps {
        let n = out.len();
        match out.last_mut() {
            Some(last) if last.node == e.node => {}
            Some(last) if last.index == e.index => {
                if n > 1 {
                    *last = e;
                }
            }
            _ => out.push(e),
        }
    }
    out
}

/// Settings for option invention and fine-tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct InventionConfig {
    pub hyper: Hyper,
    pub context: ContextRule,
    pub rollout_retries: usize,
}

impl InventionConfig {
    pub fn new(hyper: Hyper) -> Self {
        InventionConfig {
            hyper,
            context: ContextRule::default(),
            rollout_retries: 10,
        }
    }
}

/// What invention saw, for inspection and tests.
#[derive(Debug, Clone)]
pub struct InventionTrace {
    pub states: Vec<State>,
    pub leaves: Vec<NodeId>,
    pub context_vars: Vec<usize>,
    pub endpoints: Vec<Endpoint>,
}

#[derive(Debug, Clone)]
pub struct Invention {
    pub options: Vec<AbstractOption>,
    pub trace: InventionTrace,
}

/// Invents one option per consecutive endpoint pair of a greedy rollout of
/// `learner` on `env`, then fine-tunes each on its own option MDP.
///
/// Each option copies the learner's tree and policy. Its initiation set is
/// the segment's first node plus that node's siblings visited in the
/// segment; its termination set is the next endpoint. Options that cannot be
/// fine-tuned for lack of budget are flagged for later fine-tuning.
pub fn invent_options(
    learner: &Learner,
    env: &OptionEnv<'_>,
    cfg: &InventionConfig,
    task: usize,
    budget: &Budget,
    rng: &mut Rng,
) -> Result<Invention> {
    let traj = rollout(&learner.policy(), env, cfg.rollout_retries, budget, rng)?;
    let cat = &learner.cat;
    let mut states: Vec<State> = traj.transitions.iter().map(|t| t.state.clone()).collect();
    states.push(
        traj.transitions
            .last()
            .expect("non-empty")
            .next_state
            .clone(),
    );
    let n = states.len() - 1;

    let context_vars = identify_context_variables(cat, &traj, cfg.context);
    let ccats = states
        .iter()
        .map(|s| make_ccat(cat, s, &context_vars))
        .collect::<Result<Vec<_>>>()?;
    let schema = cat.schema();
    let final_region = env
        .termination
        .iter()
        .find(|r| r.contains_state(schema, &states[n]))
        .ok_or_else(|| Error::Misaligned("rollout ended outside the termination set".into()))?;
    let final_node = cat
        .find(final_region)
        .ok_or_else(|| Error::NodeNotFound(final_region.to_string()))?;
    let endpoints = identify_endpoints(
        cat,
        &ccats,
        &states,
        cfg.hyper.delta_thre,
        cfg.hyper.sigma_thre,
        final_node,
    )?;
    let leaves: Vec<NodeId> = states.iter().map(|s| cat.leaf_of(s)).collect();

    let mut options = Vec::new();
    for pair in endpoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mut init = vec![a.node];
        for &l in &leaves[a.index..b.index] {
            if l != b.node
                && !init.contains(&l)
                && cat.parent(l).is_some()
                && cat.parent(l) == cat.parent(a.node)
            {
                init.push(l);
            }
        }
        let signature = OptionSignature::new(
            init.iter().map(|&n| cat.region(n).clone()).collect(),
            vec![cat.region(b.node).clone()],
        )?;
        let mut option_learner = learner.clone();
        option_learner.stats = Default::default();
        let length = b.index - a.index;
        let stepmax = option_stepmax(Some(length), cfg.hyper.s_factor, length, cfg.hyper.stepmax);
        let sub_env = OptionEnv {
            sim: env.sim,
            task_goal: env.task_goal,
            start: states[a.index].clone(),
            termination: signature.termination.clone(),
            stepmax,
        };
        let mut run = RunConfig::new(cfg.hyper.clone());
        run.warm = true;
        run.max_episodes = Some(cfg.hyper.e_max);
        let (success, needs_finetune) = if budget.exhausted() {
            (0.0, true)
        } else {
            let report = run_catrl(&sub_env, &mut option_learner, &run, budget, rng)?;
            (
                option_learner.stats.last_eval.unwrap_or(0.0),
                !report.learned,
            )
        };
        let option_max = option_stepmax(
            option_learner.stats.recent_success_len,
            cfg.hyper.s_factor,
            stepmax,
            cfg.hyper.stepmax,
        );
        options.push(AbstractOption {
            id: 0,
            signature,
            learner: option_learner,
            provenance: Provenance {
                task,
                segment: (a.index, b.index),
            },
            success,
            stepmax: option_max,
            needs_finetune,
        });
    }
    Ok(Invention {
        options,
        trace: InventionTrace {
            states,
            leaves,
            context_vars,
            endpoints,
        },
    })
}
