use std::fmt;
use std::hash::{Hash, Hasher};

use crate::mdp::{Goal, Schema, State, VarDomain};

/// Half-open coordinate interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn contains(&self, c: f64) -> bool {
        c >= self.lo && c < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_within(&self, other: &Interval) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

/// Abstract state: one coordinate interval per variable.
///
/// Regions double as node identities across trees of the same lineage: the
/// split rule is deterministic, so a region names the same node in every
/// refinement of a common root.
#[derive(Debug, Clone)]
pub struct AbstractState {
    intervals: Vec<Interval>,
}

impl AbstractState {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    /// Region covering every variable's full domain.
    pub fn full(schema: &Schema) -> Self {
        Self {
            intervals: schema
                .vars()
                .iter()
                .map(|v| {
                    let (lo, hi) = v.extent();
                    Interval::new(lo, hi)
                })
                .collect(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, var: usize) -> Interval {
        self.intervals[var]
    }

    pub(crate) fn set_interval(&mut self, var: usize, iv: Interval) {
        self.intervals[var] = iv;
    }

    pub fn dims(&self) -> usize {
        self.intervals.len()
    }

    /// Whether the concrete state lies in this region.
    #[inline]
    pub fn contains_state(&self, schema: &Schema, state: &State) -> bool {
        self.intervals.iter().enumerate().all(|(i, iv)| {
            schema
                .var(i)
                .coord(state.get(i))
                .is_some_and(|c| iv.contains(c))
        })
    }

    /// `self ⊆ other`.
    pub fn is_within(&self, other: &AbstractState) -> bool {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(a, b)| a.is_within(b))
    }

    pub fn intersects(&self, other: &AbstractState) -> bool {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(a, b)| a.intersects(b))
    }

    /// Whether every state of this region satisfies the goal.
    pub fn within_goal(&self, schema: &Schema, goal: &Goal) -> bool {
        goal.constraints.iter().all(|c| {
            let iv = self.intervals[c.var];
            match (&c.kind, schema.var(c.var).domain()) {
                (crate::mdp::ConstraintKind::Interval { lo, hi }, VarDomain::Continuous { .. }) => {
                    iv.lo >= *lo && iv.hi <= *hi
                }
                (crate::mdp::ConstraintKind::OneOf(vals), VarDomain::Discrete { values }) => {
                    (iv.lo as usize..iv.hi as usize).all(|i| vals.contains(&values[i]))
                }
                _ => false,
            }
        })
    }

    /// Whether some state of this region satisfies the goal.
    pub fn meets_goal(&self, schema: &Schema, goal: &Goal) -> bool {
        goal.constraints.iter().all(|c| {
            let iv = self.intervals[c.var];
            match (&c.kind, schema.var(c.var).domain()) {
                (crate::mdp::ConstraintKind::Interval { lo, hi }, VarDomain::Continuous { .. }) => {
                    iv.intersects(&Interval::new(*lo, *hi))
                }
                (crate::mdp::ConstraintKind::OneOf(vals), VarDomain::Discrete { values }) => {
                    (iv.lo as usize..iv.hi as usize).any(|i| vals.contains(&values[i]))
                }
                _ => false,
            }
        })
    }

    /// Human-readable description, e.g. `x:[2.5,5) y:[0,2.5) l:{3,4} p:{0}`.
    pub fn describe(&self, schema: &Schema) -> String {
        self.intervals
            .iter()
            .enumerate()
            .map(|(i, iv)| {
                let v = schema.var(i);
                match v.domain() {
                    VarDomain::Continuous { .. } => format!("{}:[{},{})", v.name(), iv.lo, iv.hi),
                    VarDomain::Discrete { values } => {
                        let vals: Vec<String> = values[iv.lo as usize..iv.hi as usize]
                            .iter()
                            .map(i64::to_string)
                            .collect();
                        format!("{}:{{{}}}", v.name(), vals.join(","))
                    }
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Only the variables narrower than their full domain.
    pub fn describe_refined(&self, schema: &Schema) -> String {
        let full = AbstractState::full(schema);
        let parts: Vec<String> = self
            .describe(schema)
            .split(' ')
            .zip(self.intervals.iter().zip(&full.intervals))
            .filter(|(_, (a, b))| a != b)
            .map(|(s, _)| s.to_string())
            .collect();
        if parts.is_empty() {
            "*".into()
        } else {
            parts.join(" ")
        }
    }
}

impl PartialEq for AbstractState {
    fn eq(&self, other: &Self) -> bool {
        self.intervals.len() == other.intervals.len()
            && self
                .intervals
                .iter()
                .zip(&other.intervals)
                .all(|(a, b)| a.lo.to_bits() == b.lo.to_bits() && a.hi.to_bits() == b.hi.to_bits())
    }
}

impl Eq for AbstractState {}

impl Hash for AbstractState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for iv in &self.intervals {
            iv.lo.to_bits().hash(state);
            iv.hi.to_bits().hash(state);
        }
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "[{},{})", iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for AbstractState {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        let bad = || crate::Error::Invalid(format!("malformed region `{s}`"));
        let intervals = s
            .split_whitespace()
            .map(|tok| {
                let inner = tok
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
                Ok(Interval::new(
                    lo.parse().map_err(|_| bad())?,
                    hi.parse().map_err(|_| bad())?,
                ))
            })
            .collect::<crate::Result<Vec<_>>>()?;
        if intervals.is_empty() {
            return Err(bad());
        }
        Ok(AbstractState { intervals })
    }
}
