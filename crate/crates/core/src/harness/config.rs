//! Experiment configuration and its `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! domain = maze
//! method = chirp
//! size = full          # full, desk or WxH
//! tasks = 20
//! trials = 5
//! seed = 7
//! budget = 1500000
//! out = results
//! checkpoint = true
//! alpha = 0.05         # any Hyper field may be overridden
//! ```
//!
//! Hyperparameter keys: `alpha`, `gamma`, `decay`, `min_epsilon`,
//! `stepmax`, `k_cap`, `s_factor`, `e_max`, `delta_thre`, `sigma_thre`.
//! `eval_runs` sets the number of runs that decide whether a task is solved.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::catrl::Hyper;
use crate::domains::{DomainKind, SizeConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Chirp,
    CatrlBaseline,
    /// Q-learning over the finest discretization. Not one of the headline
    /// methods; kept as a sanity baseline.
    FlatQBaseline,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Chirp, Method::CatrlBaseline, Method::FlatQBaseline];

    pub fn id(self) -> &'static str {
        match self {
            Method::Chirp => "chirp",
            Method::CatrlBaseline => "catrl_baseline",
            Method::FlatQBaseline => "flat_q_baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Tabulated hyperparameters for a domain. The two methods differ only in
/// how many leaves a refinement may split.
pub fn default_hyper(domain: DomainKind, method: Method) -> Hyper {
    let (budget, decay, gamma, stepmax, chirp_k, sigma_thre, s_factor, e_max) = match domain {
        DomainKind::Maze => (1_500_000, 0.997, 0.99, 500, 2, 0.95, 10.0, 500),
        DomainKind::FourRooms => (2_000_000, 0.998, 0.999, 800, 2, 0.95, 10.0, 500),
        DomainKind::Taxi => (4_000_000, 0.999, 1.0, 1000, 2, 1.0, 4.0, 200),
        DomainKind::Office => (4_000_000, 0.9991, 0.99, 800, 5, 1.0, 10.0, 200),
        DomainKind::Minecraft => (3_000_000, 0.999, 1.0, 1000, 2, 1.0, 10.0, 200),
    };
    Hyper {
        alpha: 0.05,
        gamma,
        epsilon_decay: decay,
        min_epsilon: 0.05,
        stepmax,
        k_cap: match method {
            Method::Chirp => chirp_k,
            Method::CatrlBaseline | Method::FlatQBaseline => 5,
        },
        s_factor,
        e_max,
        delta_thre: 0.0,
        sigma_thre,
        budget,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub size: SizeConfig,
    pub method: Method,
    pub n_tasks: usize,
    pub n_trials: usize,
    /// Trial `t` samples its stream with seed `seed + t`.
    pub seed: u64,
    pub hyper: Hyper,
    pub eval_runs: usize,
    pub out: PathBuf,
    /// Write a chirp checkpoint after every task.
    pub checkpoint: bool,
}

impl ExperimentConfig {
    pub fn new(domain: DomainKind, method: Method) -> Self {
        ExperimentConfig {
            domain,
            size: SizeConfig::Full,
            method,
            n_tasks: 20,
            n_trials: 1,
            seed: 0,
            hyper: default_hyper(domain, method),
            eval_runs: 100,
            out: PathBuf::from("results"),
            checkpoint: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if self.n_tasks == 0 {
            return Err(Error::Invalid("tasks must be at least 1".into()));
        }
        if self.hyper.budget == 0 {
            return Err(Error::InvalidBudget("budget must be positive".into()));
        }
        if self.eval_runs == 0 {
            return Err(Error::Invalid("eval_runs must be positive".into()));
        }
        self.hyper.validate()
    }

    /// Sets one key. Changing `domain` or `method` resets the
    /// hyperparameters to that pair's defaults, keeping the budget.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Invalid(format!("bad value `{value}` for `{key}`")))
        }
        let h = &mut self.hyper;
        match key {
            "domain" | "method" => {
                if key == "domain" {
                    self.domain = value.parse()?;
                } else {
                    self.method = value.parse()?;
                }
                let budget = self.hyper.budget;
                self.hyper = default_hyper(self.domain, self.method);
                self.hyper.budget = budget;
            }
            "size" => self.size = value.parse()?,
            "tasks" => self.n_tasks = parse(key, value)?,
            "trials" => self.n_trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "budget" => h.budget = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "checkpoint" => self.checkpoint = parse(key, value)?,
            "eval_runs" => self.eval_runs = parse(key, value)?,
            "alpha" => h.alpha = parse(key, value)?,
            "gamma" => h.gamma = parse(key, value)?,
            "decay" => h.epsilon_decay = parse(key, value)?,
            "min_epsilon" => h.min_epsilon = parse(key, value)?,
            "stepmax" => h.stepmax = parse(key, value)?,
            "k_cap" => h.k_cap = parse(key, value)?,
            "s_factor" => h.s_factor = parse(key, value)?,
            "e_max" => h.e_max = parse(key, value)?,
            "delta_thre" => h.delta_thre = parse(key, value)?,
            "sigma_thre" => h.sigma_thre = parse(key, value)?,
            _ => return Err(Error::Invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every assignment of a config file's text, in order.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (key, value, line) in parse_assignments(text)? {
            self.set(&key, &value)
                .map_err(|e| Error::parse(line, e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }
}

/// `(key, value, line number)` triples of a `key = value` text.
pub fn parse_assignments(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::parse(i + 1, "empty key or value"));
        }
        out.push((k.to_string(), v.to_string(), i + 1));
    }
    Ok(out)
}
