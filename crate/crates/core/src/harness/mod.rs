//! Experiment runner: task streams per trial, the three methods, metrics
//! files and the fraction-solved curve.

mod config;
mod metrics;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rayon::prelude::*;

pub use config::{default_hyper, parse_assignments, ExperimentConfig, Method};
pub use metrics::{
    curve, emit_curve, format_curve, parse_metrics, read_metrics, write_metrics, CurvePoint,
    MetricsRow, CURVE_HEADER, CURVE_STEP, METRICS_HEADER,
};

use crate::cat::Cat;
use crate::catrl::{evaluate_policy, run_catrl, Budget, Hyper, Learner, RunConfig, TaskEnv};
use crate::chirp::{ChirpAgent, ChirpConfig, LEARNING_STREAM};
use crate::domains::{make_domain, sample_stream, Simulator};
use crate::error::{Error, Result};
use crate::mdp::Task;
use crate::Rng;

/// What one method reports about one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskOutcome {
    pub solved: bool,
    pub timesteps: u64,
    pub options: usize,
    pub leaves: usize,
}

/// CAT+RL on each task, keeping the refined tree from task to task but
/// starting every task with fresh values and statistics. With `flat` set,
/// tabular Q-learning over the finest partition instead.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub cat: Option<Cat>,
    pub hyper: Hyper,
    pub eval_runs: usize,
    pub solved_threshold: f64,
    pub flat: bool,
    pub rng: Rng,
}

impl Baseline {
    pub fn new(hyper: Hyper, eval_runs: usize, flat: bool, seed: u64) -> Self {
        let mut rng = Rng::seed_from_u64(seed);
        rng.set_stream(LEARNING_STREAM);
        Baseline {
            cat: None,
            hyper,
            eval_runs,
            solved_threshold: 0.9,
            flat,
            rng,
        }
    }

    /// Trains until the greedy policy passes the evaluation or the budget
    /// runs out. Evaluation steps count against the budget.
    pub fn solve_task(
        &mut self,
        sim: &dyn Simulator,
        task: &Task,
        budget: &Budget,
    ) -> Result<TaskOutcome> {
        if budget.exhausted() {
            return Err(Error::InvalidBudget(
                "per-task budget must be positive".into(),
            ));
        }
        let mut cat = self
            .cat
            .take()
            .unwrap_or_else(|| Cat::new(sim.schema().clone()));
        let mut learner = if self.flat {
            Learner::flat(cat, sim.num_actions())
        } else {
            cat.align_to_goal(&task.goal);
            Learner::new(cat, sim.num_actions())
        };
        let mut outcome = TaskOutcome {
            solved: task.goal.satisfied_by(&task.initial_state),
            timesteps: 0,
            options: 0,
            leaves: 0,
        };
        let env = TaskEnv {
            sim,
            task,
            stepmax: self.hyper.stepmax,
        };
        let mut run = RunConfig::new(self.hyper.clone());
        run.refine = !self.flat;
        while !outcome.solved && !budget.exhausted() {
            let report = run_catrl(&env, &mut learner, &run, budget, &mut self.rng)?;
            if !report.learned {
                break;
            }
            let rate = evaluate_policy(
                &learner.policy(),
                &env,
                self.eval_runs,
                budget,
                &mut self.rng,
            );
            outcome.solved = rate >= self.solved_threshold;
        }
        outcome.timesteps = budget.used();
        outcome.leaves = learner.cat.leaf_count();
        self.cat = Some(learner.cat);
        Ok(outcome)
    }
}

/// Metrics file of one (method, trial).
pub fn metrics_path(out: &Path, method: Method, trial: usize) -> PathBuf {
    out.join(format!("metrics_{method}_trial{trial}.csv"))
}

pub fn checkpoint_path(out: &Path, trial: usize) -> PathBuf {
    out.join(format!("checkpoint_chirp_trial{trial}.txt"))
}

pub fn summary_path(out: &Path, method: Method) -> PathBuf {
    out.join(format!("summary_{method}.csv"))
}

/// Runs one trial and returns its metrics rows.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<MetricsRow>> {
    let sim = make_domain(cfg.domain, cfg.size)?;
    let seed = cfg.seed.wrapping_add(trial as u64);
    let stream = sample_stream(&sim, seed, cfg.n_tasks, cfg.hyper.budget)?;
    let n = stream.tasks.len();
    let mut rows = Vec::with_capacity(n);
    let mut cumulative = 0;
    let mut solved = 0;
    let mut record = |task: usize, o: TaskOutcome, rows: &mut Vec<MetricsRow>| {
        cumulative += o.timesteps;
        solved += o.solved as usize;
        rows.push(MetricsRow {
            method: cfg.method.id().to_string(),
            trial,
            task,
            timesteps: cumulative,
            solved: o.solved,
            fraction: solved as f64 / n as f64,
            options: o.options,
            leaves: o.leaves,
        });
    };
    match cfg.method {
        Method::Chirp => {
            let mut chirp = ChirpConfig::new(cfg.hyper.clone());
            chirp.eval_runs = cfg.eval_runs;
            let mut agent = ChirpAgent::new(Cat::new(sim.schema().clone()), chirp, seed);
            let ckpt = checkpoint_path(&cfg.out, trial);
            agent.solve_stream(&sim, &stream, |agent, r| {
                let o = TaskOutcome {
                    solved: r.solved,
                    timesteps: r.timesteps,
                    options: agent.model.len(),
                    leaves: agent.cat.leaf_count(),
                };
                record(r.task, o, &mut rows);
                if cfg.checkpoint {
                    std::fs::write(&ckpt, agent.to_checkpoint())
                        .map_err(|e| Error::io(&ckpt, e))?;
                }
                Ok(())
            })?;
        }
        Method::CatrlBaseline | Method::FlatQBaseline => {
            let flat = cfg.method == Method::FlatQBaseline;
            let mut b = Baseline::new(cfg.hyper.clone(), cfg.eval_runs, flat, seed);
            for (i, task) in stream.tasks.iter().enumerate() {
                let o = b.solve_task(&sim, task, &Budget::new(stream.per_task_budget))?;
                record(i, o, &mut rows);
            }
        }
    }
    Ok(rows)
}

/// Runs every trial, writes one metrics file per trial and a summary curve
/// for the method, and returns all rows in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let per_trial = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| {
            let rows = run_trial(cfg, t)?;
            write_metrics(&metrics_path(&cfg.out, cfg.method, t), &rows)?;
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<MetricsRow> = per_trial.into_iter().flatten().collect();
    let summary = summary_path(&cfg.out, cfg.method);
    let points = curve(&rows, CURVE_STEP)?;
    std::fs::write(&summary, format_curve(&points)).map_err(|e| Error::io(&summary, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{DomainKind, SizeConfig};

    fn tiny(method: Method, dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(DomainKind::Maze, method);
        c.size = SizeConfig::Custom {
            width: 4,
            height: 3,
        };
        c.n_tasks = 3;
        c.n_trials = 2;
        c.seed = 5;
        c.hyper.budget = 40_000;
        c.hyper.stepmax = 60;
        c.hyper.epsilon_decay = 0.99;
        c.eval_runs = 20;
        c.out = dir.to_path_buf();
        c
    }

    #[test]
    fn every_method_solves_a_tiny_field() {
        let dir = tempfile::tempdir().unwrap();
        for m in Method::ALL {
            let rows = run_experiment(&tiny(m, dir.path())).unwrap();
            assert_eq!(rows.len(), 6, "{m}");
            assert!(rows.iter().all(|r| r.solved), "{m}: {rows:?}");
            for t in 0..2 {
                let trial: Vec<_> = rows.iter().filter(|r| r.trial == t).collect();
                assert!(trial.windows(2).all(|w| w[1].timesteps > w[0].timesteps));
                assert_eq!(trial.last().unwrap().fraction, 1.0);
            }
            assert!(summary_path(dir.path(), m).exists());
        }
    }

    #[test]
    fn rerun_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut ca = tiny(Method::Chirp, a.path());
        ca.checkpoint = true;
        let mut cb = ca.clone();
        cb.out = b.path().to_path_buf();
        run_experiment(&ca).unwrap();
        run_experiment(&cb).unwrap();
        for t in 0..2 {
            let fa = std::fs::read(metrics_path(a.path(), Method::Chirp, t)).unwrap();
            let fb = std::fs::read(metrics_path(b.path(), Method::Chirp, t)).unwrap();
            assert_eq!(fa, fb);
            assert!(checkpoint_path(a.path(), t).exists());
        }
    }

    #[test]
    fn summary_matches_recomputation() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(Method::CatrlBaseline, dir.path());
        run_experiment(&cfg).unwrap();
        let files: Vec<_> = (0..2)
            .map(|t| metrics_path(dir.path(), cfg.method, t))
            .collect();
        let out = dir.path().join("curve.csv");
        emit_curve(&files, &out).unwrap();
        assert_eq!(
            std::fs::read_to_string(out).unwrap(),
            std::fs::read_to_string(summary_path(dir.path(), cfg.method)).unwrap()
        );
    }

    #[test]
    fn unwritable_output_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let mut cfg = tiny(Method::Chirp, &blocker.join("sub"));
        cfg.n_trials = 1;
        let e = run_experiment(&cfg).unwrap_err();
        assert!(e.to_string().contains("file"), "{e}");
    }
}
