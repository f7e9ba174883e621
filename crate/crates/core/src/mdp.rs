//! Shared vocabulary: factored variables, states, goals, tasks, task streams
//! and trajectories.
//!
//! Continuous variables take values in a half-open interval `[min, max)`.
//! Discrete variables take values from an ascending list of integers. Every
//! variable also has a *coordinate* used by the abstraction tree: the value
//! itself for continuous variables and the position in the value list for
//! discrete ones, so that every abstract interval is a half-open coordinate
//! range.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum VarDomain {
    /// Real values in `[min, max)`. When `grid` is set, abstraction splits
    /// snap to multiples of it and intervals of that width are atomic.
    Continuous {
        min: f64,
        max: f64,
        grid: Option<f64>,
    },
    /// Ascending, duplicate-free integer values.
    Discrete { values: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpec {
    name: String,
    domain: VarDomain,
    // first value when the discrete values are consecutive integers
    dense_from: Option<i64>,
}

impl VariableSpec {
    pub fn continuous(name: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        Self::new(
            name,
            VarDomain::Continuous {
                min,
                max,
                grid: None,
            },
        )
    }

    /// A continuous map coordinate whose cells have width `unit`.
    pub fn gridded(name: impl Into<String>, min: f64, max: f64, unit: f64) -> Result<Self> {
        Self::new(
            name,
            VarDomain::Continuous {
                min,
                max,
                grid: Some(unit),
            },
        )
    }

    pub fn discrete(name: impl Into<String>, values: Vec<i64>) -> Result<Self> {
        Self::new(name, VarDomain::Discrete { values })
    }

    /// Discrete variable over `0..n`.
    pub fn range(name: impl Into<String>, n: i64) -> Result<Self> {
        Self::discrete(name, (0..n).collect())
    }

    pub fn new(name: impl Into<String>, domain: VarDomain) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: &str| Error::InvalidVariable {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(invalid("name must be a non-empty identifier"));
        }
        let mut dense_from = None;
        match &domain {
            VarDomain::Continuous { min, max, grid } => {
                if !(min.is_finite() && max.is_finite() && min < max) {
                    return Err(invalid("continuous domain requires finite min < max"));
                }
                if let Some(g) = grid {
                    if !(g.is_finite() && *g > 0.0) {
                        return Err(invalid("grid unit must be positive"));
                    }
                }
            }
            VarDomain::Discrete { values } => {
                if values.is_empty() {
                    return Err(invalid("discrete domain must be non-empty"));
                }
                if values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid(
                        "discrete values must be ascending and duplicate-free",
                    ));
                }
                if values.windows(2).all(|w| w[1] == w[0] + 1) {
                    dense_from = Some(values[0]);
                }
            }
        }
        Ok(Self {
            name,
            domain,
            dense_from,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &VarDomain {
        &self.domain
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.domain, VarDomain::Discrete { .. })
    }

    /// Coordinate extent `[lo, hi)` of the whole domain.
    pub fn extent(&self) -> (f64, f64) {
        match &self.domain {
            VarDomain::Continuous { min, max, .. } => (*min, *max),
            VarDomain::Discrete { values } => (0.0, values.len() as f64),
        }
    }

    pub fn grid(&self) -> Option<f64> {
        match &self.domain {
            VarDomain::Continuous { grid, .. } => *grid,
            VarDomain::Discrete { .. } => None,
        }
    }

    /// Coordinate of a value, or `None` when the value is outside the domain.
    #[inline]
    pub fn coord(&self, value: f64) -> Option<f64> {
        match &self.domain {
            VarDomain::Continuous { min, max, .. } => {
                (value >= *min && value < *max).then_some(value)
            }
            VarDomain::Discrete { values } => {
                if value.fract() != 0.0 {
                    return None;
                }
                let v = value as i64;
                if let Some(first) = self.dense_from {
                    let idx = v - first;
                    return (idx >= 0 && (idx as usize) < values.len()).then_some(idx as f64);
                }
                values.binary_search(&v).ok().map(|i| i as f64)
            }
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.coord(value).is_some()
    }

    /// Discrete value at a coordinate index.
    pub fn value_at(&self, index: usize) -> Option<i64> {
        match &self.domain {
            VarDomain::Discrete { values } => values.get(index).copied(),
            VarDomain::Continuous { .. } => None,
        }
    }
}

impl fmt::Display for VariableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.domain {
            VarDomain::Continuous { min, max, grid } => {
                write!(f, "{} continuous {} {}", self.name, min, max)?;
                if let Some(g) = grid {
                    write!(f, " grid {g}")?;
                }
                Ok(())
            }
            VarDomain::Discrete { values } => {
                write!(f, "{} discrete", self.name)?;
                for v in values {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for VariableSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("malformed variable spec `{s}`"));
        let mut parts = s.split_whitespace();
        let name = parts.next().ok_or_else(bad)?;
        match parts.next().ok_or_else(bad)? {
            "continuous" => {
                let min: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let max: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                match parts.next() {
                    None => VariableSpec::continuous(name, min, max),
                    Some("grid") => {
                        let g: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                        VariableSpec::gridded(name, min, max, g)
                    }
                    Some(_) => Err(bad()),
                }
            }
            "discrete" => {
                let values = parts
                    .map(|p| p.parse::<i64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                VariableSpec::discrete(name, values)
            }
            _ => Err(bad()),
        }
    }
}

/// Ordered list of variables. Cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    vars: Arc<[VariableSpec]>,
}

impl Schema {
    pub fn new(vars: Vec<VariableSpec>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::SchemaMismatch(
                "schema needs at least one variable".into(),
            ));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::SchemaMismatch(format!(
                    "duplicate variable `{}`",
                    v.name
                )));
            }
        }
        Ok(Self { vars: vars.into() })
    }

    pub fn vars(&self) -> &[VariableSpec] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, index: usize) -> &VariableSpec {
        &self.vars[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Builds a validated state.
    pub fn state(&self, values: Vec<f64>) -> Result<State> {
        if values.len() != self.vars.len() {
            return Err(Error::SchemaMismatch(format!(
                "state has {} values, schema has {} variables",
                values.len(),
                self.vars.len()
            )));
        }
        for (v, &x) in self.vars.iter().zip(&values) {
            if !v.contains(x) {
                return Err(Error::OutOfDomain {
                    variable: v.name.clone(),
                    value: x,
                });
            }
        }
        Ok(State { values })
    }

    pub fn contains(&self, state: &State) -> bool {
        state.values.len() == self.vars.len()
            && self
                .vars
                .iter()
                .zip(&state.values)
                .all(|(v, &x)| v.contains(x))
    }

    /// Coordinate of variable `var` in `state`. Panics on out-of-domain values.
    #[inline]
    pub fn coord(&self, state: &State, var: usize) -> f64 {
        self.vars[var]
            .coord(state.values[var])
            .expect("state value outside its variable domain")
    }
}

/// One value per variable, in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    values: Vec<f64>,
}

impl State {
    /// Unvalidated constructor for tests that need out-of-range values.
    #[cfg(test)]
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, var: usize) -> f64 {
        self.values[var]
    }

    pub(crate) fn set(&mut self, var: usize, value: f64) {
        self.values[var] = value;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    /// Continuous value in `[lo, hi)`.
    Interval { lo: f64, hi: f64 },
    /// Discrete value is one of the listed values.
    OneOf(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub var: usize,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn interval(var: usize, lo: f64, hi: f64) -> Self {
        Self {
            var,
            kind: ConstraintKind::Interval { lo, hi },
        }
    }

    pub fn one_of(var: usize, values: Vec<i64>) -> Self {
        Self {
            var,
            kind: ConstraintKind::OneOf(values),
        }
    }

    pub fn equals(var: usize, value: i64) -> Self {
        Self::one_of(var, vec![value])
    }

    #[inline]
    pub fn admits(&self, value: f64) -> bool {
        match &self.kind {
            ConstraintKind::Interval { lo, hi } => value >= *lo && value < *hi,
            ConstraintKind::OneOf(vals) => value.fract() == 0.0 && vals.contains(&(value as i64)),
        }
    }

    /// Coordinate range admitted by this constraint, when it is a single
    /// contiguous range in domain order.
    pub fn coord_range(&self, spec: &VariableSpec) -> Option<(f64, f64)> {
        match (&self.kind, spec.domain()) {
            (ConstraintKind::Interval { lo, hi }, VarDomain::Continuous { .. }) => Some((*lo, *hi)),
            (ConstraintKind::OneOf(vals), VarDomain::Discrete { .. }) => {
                let mut idx: Vec<usize> = vals
                    .iter()
                    .filter_map(|&v| spec.coord(v as f64).map(|c| c as usize))
                    .collect();
                idx.sort_unstable();
                idx.dedup();
                let (&first, &last) = (idx.first()?, idx.last()?);
                (last - first + 1 == idx.len()).then_some((first as f64, (last + 1) as f64))
            }
            _ => None,
        }
    }
}

/// Conjunction of per-variable constraints. The empty goal is always satisfied.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Goal {
    pub constraints: Vec<Constraint>,
}

impl Goal {
    pub fn new(constraints: Vec<Constraint>) -> Self {
        Self { constraints }
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        for c in &self.constraints {
            let spec = schema.vars().get(c.var).ok_or_else(|| {
                Error::SchemaMismatch(format!("goal references unknown variable #{}", c.var))
            })?;
            match (&c.kind, spec.domain()) {
                (ConstraintKind::Interval { lo, hi }, VarDomain::Continuous { .. }) if lo < hi => {}
                (ConstraintKind::OneOf(v), VarDomain::Discrete { .. }) if !v.is_empty() => {}
                _ => {
                    return Err(Error::SchemaMismatch(format!(
                        "constraint kind does not fit variable `{}`",
                        spec.name()
                    )))
                }
            }
        }
        Ok(())
    }

    /// Membership test without schema validation.
    #[inline]
    pub fn satisfied_by(&self, state: &State) -> bool {
        self.constraints
            .iter()
            .all(|c| state.values.get(c.var).is_some_and(|&v| c.admits(v)))
    }

    pub fn format(&self, schema: &Schema) -> String {
        if self.constraints.is_empty() {
            return "*".to_string();
        }
        self.constraints
            .iter()
            .map(|c| {
                let name = schema.vars().get(c.var).map_or("?", |v| v.name());
                match &c.kind {
                    ConstraintKind::Interval { lo, hi } => format!("{name} in [{lo}, {hi})"),
                    ConstraintKind::OneOf(vals) => {
                        let vs: Vec<String> = vals.iter().map(i64::to_string).collect();
                        format!("{name} in {{{}}}", vs.join(", "))
                    }
                }
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn parse(text: &str, schema: &Schema) -> Result<Self> {
        let text = text.trim();
        if text == "*" || text.is_empty() {
            return Ok(Goal::default());
        }
        let bad = |m: &str| Error::Invalid(format!("malformed goal `{text}`: {m}"));
        let mut constraints = Vec::new();
        for part in text.split(';') {
            let part = part.trim();
            let (name, rest) = part
                .split_once(" in ")
                .ok_or_else(|| bad("expected `name in ...`"))?;
            let var = schema
                .index_of(name.trim())
                .ok_or_else(|| bad("unknown variable"))?;
            let rest = rest.trim();
            if let Some(inner) = rest.strip_prefix('[').and_then(|r| r.strip_suffix(')')) {
                let (lo, hi) = inner
                    .split_once(',')
                    .ok_or_else(|| bad("expected [lo, hi)"))?;
                let lo = lo.trim().parse().map_err(|_| bad("bad bound"))?;
                let hi = hi.trim().parse().map_err(|_| bad("bad bound"))?;
                constraints.push(Constraint::interval(var, lo, hi));
            } else if let Some(inner) = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
                let vals = inner
                    .split(',')
                    .map(|v| v.trim().parse::<i64>().map_err(|_| bad("bad value")))
                    .collect::<Result<Vec<_>>>()?;
                constraints.push(Constraint::one_of(var, vals));
            } else {
                return Err(bad("expected [lo, hi) or {values}"));
            }
        }
        let goal = Goal { constraints };
        goal.validate(schema)?;
        Ok(goal)
    }
}

/// True iff every goal constraint holds in `state`.
pub fn is_goal(schema: &Schema, state: &State, goal: &Goal) -> Result<bool> {
    if state.len() != schema.len() {
        return Err(Error::SchemaMismatch(format!(
            "state has {} values, schema has {} variables",
            state.len(),
            schema.len()
        )));
    }
    goal.validate(schema)?;
    Ok(goal.satisfied_by(state))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub initial_state: State,
    pub goal: Goal,
    /// Domain-specific reward tag.
    pub reward_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskStream {
    pub domain_id: String,
    pub seed: u64,
    pub schema: Schema,
    pub tasks: Vec<Task>,
    /// Per-task interaction budget in environment steps.
    pub per_task_budget: u64,
}

impl TaskStream {
    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::Invalid("task stream is empty".into()));
        }
        if self.per_task_budget == 0 {
            return Err(Error::InvalidBudget(
                "per-task budget must be positive".into(),
            ));
        }
        for t in &self.tasks {
            if !self.schema.contains(&t.initial_state) {
                return Err(Error::SchemaMismatch("initial state outside schema".into()));
            }
            t.goal.validate(&self.schema)?;
        }
        Ok(())
    }

    /// Plain-text record: one `key = value` pair per line.
    ///
    /// ```text
    /// domain = taxi
    /// seed = 7
    /// budget = 4000000
    /// variables = 4
    /// var.0 = x continuous 0 5 grid 1
    /// ...
    /// tasks = 20
    /// task.0.initial = 1.25 3.5 1 0
    /// task.0.goal = l in {2}; p in {0}
    /// task.0.reward = taxi
    /// ```
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        out.push_str("# task stream\n");
        out.push_str(&format!("domain = {}\n", self.domain_id));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("budget = {}\n", self.per_task_budget));
        out.push_str(&format!("variables = {}\n", self.schema.len()));
        for (i, v) in self.schema.vars().iter().enumerate() {
            out.push_str(&format!("var.{i} = {v}\n"));
        }
        out.push_str(&format!("tasks = {}\n", self.tasks.len()));
        for (i, t) in self.tasks.iter().enumerate() {
            out.push_str(&format!("task.{i}.initial = {}\n", t.initial_state));
            out.push_str(&format!(
                "task.{i}.goal = {}\n",
                t.goal.format(&self.schema)
            ));
            out.push_str(&format!("task.{i}.reward = {}\n", t.reward_id));
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let kv = parse_key_values(text)?;
        let get = |key: &str| {
            kv.iter()
                .find(|(k, _, _)| k == key)
                .map(|(_, v, line)| (v.as_str(), *line))
                .ok_or_else(|| Error::parse(0, format!("missing key `{key}`")))
        };
        let num = |key: &str| -> Result<u64> {
            let (v, line) = get(key)?;
            v.parse()
                .map_err(|_| Error::parse(line, format!("`{key}` is not an integer")))
        };
        let domain_id = get("domain")?.0.to_string();
        let seed = num("seed")?;
        let per_task_budget = num("budget")?;
        let n_vars = num("variables")? as usize;
        let mut vars = Vec::with_capacity(n_vars);
        for i in 0..n_vars {
            let (v, line) = get(&format!("var.{i}"))?;
            vars.push(
                v.parse::<VariableSpec>()
                    .map_err(|e| Error::parse(line, e.to_string()))?,
            );
        }
        let schema = Schema::new(vars)?;
        let n_tasks = num("tasks")? as usize;
        let mut tasks = Vec::with_capacity(n_tasks);
        for i in 0..n_tasks {
            let (init, line) = get(&format!("task.{i}.initial"))?;
            let values = init
                .split_whitespace()
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(line, "bad state value"))?;
            let initial_state = schema
                .state(values)
                .map_err(|e| Error::parse(line, e.to_string()))?;
            let (g, line) = get(&format!("task.{i}.goal"))?;
            let goal = Goal::parse(g, &schema).map_err(|e| Error::parse(line, e.to_string()))?;
            let reward_id = get(&format!("task.{i}.reward"))?.0.to_string();
            tasks.push(Task {
                initial_state,
                goal,
                reward_id,
            });
        }
        let stream = TaskStream {
            domain_id,
            seed,
            schema,
            tasks,
            per_task_budget,
        };
        stream.validate()?;
        Ok(stream)
    }
}

/// Parses `key = value` lines, skipping blanks and `#` comments.
pub(crate) fn parse_key_values(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: State,
    pub action: usize,
    pub reward: f64,
    pub next_state: State,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
}

impl Trajectory {
    pub fn push(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// The visited states `s_0, ..., s_n`.
    pub fn states(&self) -> Vec<&State> {
        let mut out: Vec<&State> = self.transitions.iter().map(|t| &t.state).collect();
        if let Some(last) = self.transitions.last() {
            out.push(&last.next_state);
        }
        out
    }

    /// Checks that each transition starts where the previous one ended.
    pub fn is_chained(&self) -> bool {
        self.transitions
            .windows(2)
            .all(|w| w[0].next_state == w[1].state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taxi_schema() -> Schema {
        Schema::new(vec![
            VariableSpec::continuous("x", 0.0, 5.0).unwrap(),
            VariableSpec::continuous("y", 0.0, 5.0).unwrap(),
            VariableSpec::range("l", 5).unwrap(),
            VariableSpec::range("p", 2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_bad_variable_specs() {
        assert!(VariableSpec::continuous("x", 1.0, 1.0).is_err());
        assert!(VariableSpec::discrete("d", vec![]).is_err());
        assert!(VariableSpec::discrete("d", vec![1, 1]).is_err());
        assert!(VariableSpec::discrete("d", vec![2, 1]).is_err());
    }

    #[test]
    fn state_construction_checks_domains() {
        let s = taxi_schema();
        assert!(s.state(vec![0.9, 2.1, 3.0, 0.0]).is_ok());
        assert!(matches!(
            s.state(vec![5.0, 2.1, 3.0, 0.0]),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(s.state(vec![0.9, 2.1, 5.0, 0.0]).is_err());
        assert!(s.state(vec![0.9, 2.1, 1.5, 0.0]).is_err());
        assert!(matches!(s.state(vec![0.9]), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn is_goal_examples() {
        let s = taxi_schema();
        let delivered = Goal::new(vec![Constraint::equals(2, 2), Constraint::equals(3, 0)]);
        let st = s.state(vec![0.9, 2.1, 3.0, 0.0]).unwrap();
        assert!(!is_goal(&s, &st, &delivered).unwrap());
        assert!(is_goal(&s, &st, &Goal::default()).unwrap());
        let st = s.state(vec![2.6, 0.9, 3.0, 0.0]).unwrap();
        let region = Goal::new(vec![Constraint::interval(0, 2.5, 5.0)]);
        assert!(is_goal(&s, &st, &region).unwrap());
    }

    #[test]
    fn is_goal_schema_mismatch() {
        let s = taxi_schema();
        let st = State::from_raw(vec![1.0, 1.0]);
        assert!(is_goal(&s, &st, &Goal::default()).is_err());
        let st = s.state(vec![0.9, 2.1, 3.0, 0.0]).unwrap();
        let g = Goal::new(vec![Constraint::equals(9, 0)]);
        assert!(is_goal(&s, &st, &g).is_err());
    }

    #[test]
    fn discrete_coordinates_follow_declared_order() {
        let v = VariableSpec::discrete("d", vec![-3, 4, 10]).unwrap();
        assert_eq!(v.coord(4.0), Some(1.0));
        assert_eq!(v.coord(5.0), None);
        assert_eq!(v.extent(), (0.0, 3.0));
        let c = Constraint::one_of(0, vec![10, 4]);
        assert_eq!(c.coord_range(&v), Some((1.0, 3.0)));
        assert_eq!(Constraint::one_of(0, vec![-3, 10]).coord_range(&v), None);
    }

    #[test]
    fn goal_text_round_trip() {
        let s = taxi_schema();
        let g = Goal::new(vec![
            Constraint::interval(0, 2.5, 5.0),
            Constraint::one_of(2, vec![1, 3]),
        ]);
        let text = g.format(&s);
        assert_eq!(text, "x in [2.5, 5); l in {1, 3}");
        assert_eq!(Goal::parse(&text, &s).unwrap(), g);
        assert_eq!(Goal::parse("*", &s).unwrap(), Goal::default());
    }

    #[test]
    fn trajectory_chaining() {
        let s = taxi_schema();
        let a = s.state(vec![0.5, 0.5, 1.0, 0.0]).unwrap();
        let b = s.state(vec![1.5, 0.5, 1.0, 0.0]).unwrap();
        let c = s.state(vec![2.5, 0.5, 1.0, 0.0]).unwrap();
        let mut t = Trajectory::default();
        t.push(Transition {
            state: a.clone(),
            action: 0,
            reward: -1.0,
            next_state: b.clone(),
            done: false,
        });
        t.push(Transition {
            state: b.clone(),
            action: 0,
            reward: -1.0,
            next_state: c.clone(),
            done: true,
        });
        assert!(t.is_chained());
        assert_eq!(t.states(), vec![&a, &b, &c]);
        t.push(Transition {
            state: a.clone(),
            action: 0,
            reward: -1.0,
            next_state: b,
            done: false,
        });
        assert!(!t.is_chained());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dropping_a_constraint_never_falsifies(
                x in 0.0f64..5.0, y in 0.0f64..5.0, l in 0i64..5, p in 0i64..2,
                lo in 0.0f64..5.0, w in 0.1f64..5.0, ls in proptest::collection::vec(0i64..5, 1..4),
                drop in 0usize..3,
            ) {
                let s = taxi_schema();
                let st = s.state(vec![x, y, l as f64, p as f64]).unwrap();
                let mut g = Goal::new(vec![
                    Constraint::interval(0, lo, lo + w),
                    Constraint::one_of(2, ls),
                    Constraint::equals(3, p),
                ]);
                let before = is_goal(&s, &st, &g).unwrap();
                g.constraints.remove(drop);
                let after = is_goal(&s, &st, &g).unwrap();
                prop_assert!(!before || after);
            }
        }
    }
}
