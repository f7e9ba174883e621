//! Stochastic grid-world simulators: maze, four rooms, office, taxi and
//! minecraft.
//!
//! Every domain shares one layout: the first two variables are the agent's
//! continuous position `x` and `y` (one map cell per unit), actions 0-3 are
//! the moves north, south, east and west, and any further actions interact
//! with the cell under the agent. A move succeeds with probability 0.8 and
//! otherwise slips to one of the two perpendicular directions. Moves into a
//! wall or off the map leave the position unchanged and still cost a step.

mod map;
mod sampling;

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

pub use map::{Cell, GridMap};
pub use sampling::{sample_stream, sample_task};

use crate::error::{Error, Result};
use crate::mdp::{Goal, Schema, State, VariableSpec};
use crate::Rng;

pub const NORTH: usize = 0;
pub const SOUTH: usize = 1;
pub const EAST: usize = 2;
pub const WEST: usize = 3;
/// Taxi pickup, minecraft gather.
pub const INTERACT: usize = 4;
/// Taxi dropoff, minecraft craft.
pub const INTERACT2: usize = 5;

const MOVES: [(i64, i64); 4] = [(0, -1), (0, 1), (1, 0), (-1, 0)];
// the two perpendicular directions of each move
const SLIPS: [[usize; 2]; 4] = [[EAST, WEST], [EAST, WEST], [NORTH, SOUTH], [NORTH, SOUTH]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainKind {
    Maze,
    FourRooms,
    Office,
    Taxi,
    Minecraft,
}

impl DomainKind {
    pub const ALL: [DomainKind; 5] = [
        DomainKind::Maze,
        DomainKind::FourRooms,
        DomainKind::Office,
        DomainKind::Taxi,
        DomainKind::Minecraft,
    ];

    pub fn id(self) -> &'static str {
        match self {
            DomainKind::Maze => "maze",
            DomainKind::FourRooms => "four_rooms",
            DomainKind::Office => "office",
            DomainKind::Taxi => "taxi",
            DomainKind::Minecraft => "minecraft",
        }
    }

    fn bundled(self, size: SizeConfig) -> Option<&'static str> {
        Some(match (self, size) {
            (DomainKind::Maze, SizeConfig::Full) => include_str!("../../maps/maze.txt"),
            (DomainKind::Maze, SizeConfig::Desk) => include_str!("../../maps/maze_desk.txt"),
            (DomainKind::FourRooms, SizeConfig::Full) => include_str!("../../maps/four_rooms.txt"),
            (DomainKind::FourRooms, SizeConfig::Desk) => {
                include_str!("../../maps/four_rooms_desk.txt")
            }
            (DomainKind::Office, SizeConfig::Full) => include_str!("../../maps/office.txt"),
            (DomainKind::Office, SizeConfig::Desk) => include_str!("../../maps/office_desk.txt"),
            (DomainKind::Taxi, SizeConfig::Full) => include_str!("../../maps/taxi.txt"),
            (DomainKind::Taxi, SizeConfig::Desk) => include_str!("../../maps/taxi_desk.txt"),
            (DomainKind::Minecraft, SizeConfig::Full) => include_str!("../../maps/minecraft.txt"),
            (DomainKind::Minecraft, SizeConfig::Desk) => {
                include_str!("../../maps/minecraft_desk.txt")
            }
            _ => return None,
        })
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DomainKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::UnknownDomain(s.to_string()))
    }
}

/// Map scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeConfig {
    /// The bundled full-size map.
    Full,
    /// The bundled small map for quick runs.
    Desk,
    /// Generated geometry: an open field (maze), four rooms, or an open taxi
    /// grid with landmarks in the corners.
    Custom { width: usize, height: usize },
}

impl FromStr for SizeConfig {
    type Err = Error;

    /// `full`, `desk` or `WxH`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SizeConfig::Full),
            "desk" => Ok(SizeConfig::Desk),
            _ => {
                let bad = || Error::Invalid(format!("size must be full, desk or WxH, got `{s}`"));
                let (w, h) = s.split_once('x').ok_or_else(bad)?;
                Ok(SizeConfig::Custom {
                    width: w.parse().map_err(|_| bad())?,
                    height: h.parse().map_err(|_| bad())?,
                })
            }
        }
    }
}

/// Result of one simulator step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: State,
    pub reward: f64,
    /// The goal is satisfied in `next_state`.
    pub done: bool,
    /// The action was an illegal pickup or dropoff.
    pub illegal: bool,
}

/// Anything that can advance a state under an action.
pub trait Simulator: Sync {
    fn schema(&self) -> &Schema;
    fn num_actions(&self) -> usize;
    /// Reward of an ordinary, non-goal step.
    fn step_reward(&self) -> f64;
    fn step(&self, goal: &Goal, state: &State, action: usize, rng: &mut Rng)
        -> Result<StepOutcome>;
}

/// Geometry, schema and reward constants of one domain.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    kind: DomainKind,
    map: GridMap,
    schema: Schema,
    actions: Vec<&'static str>,
    landmarks: Vec<(usize, usize)>,
    /// Probability that a move goes where intended.
    pub move_success: f64,
    pub step_reward: f64,
    pub goal_reward: f64,
    pub illegal_reward: f64,
}

/// Builds a domain at the requested scale.
pub fn make_domain(kind: DomainKind, size: SizeConfig) -> Result<DomainSpec> {
    let map = match size {
        SizeConfig::Custom { width, height } => match kind {
            DomainKind::Maze => GridMap::open(width, height)?,
            DomainKind::FourRooms => GridMap::four_rooms(width, height)?,
            DomainKind::Taxi => GridMap::taxi(width, height, 4)?,
            DomainKind::Office | DomainKind::Minecraft => {
                return Err(Error::InvalidMap(format!(
                    "{kind} has no generated layout; supply a map file"
                )))
            }
        },
        _ => kind.bundled(size).expect("bundled map").parse()?,
    };
    DomainSpec::from_map(kind, map)
}

impl DomainSpec {
    /// Domain over a user-supplied map.
    pub fn from_map(kind: DomainKind, map: GridMap) -> Result<DomainSpec> {
        let (w, h) = (map.width() as f64, map.height() as f64);
        let mut vars = vec![
            VariableSpec::gridded("x", 0.0, w, 1.0)?,
            VariableSpec::gridded("y", 0.0, h, 1.0)?,
        ];
        let mut actions = vec!["north", "south", "east", "west"];
        let landmarks = map.landmarks();
        let require = |cell: Cell, what: &str| {
            if map.cells_where(|c| c == cell).is_empty() {
                Err(Error::InvalidMap(format!(
                    "{kind} map needs at least one {what}"
                )))
            } else {
                Ok(())
            }
        };
        let (step_reward, illegal_reward) = match kind {
            DomainKind::Maze | DomainKind::FourRooms => (-1.0, -1.0),
            DomainKind::Office => {
                require(Cell::Coffee, "coffee cell")?;
                require(Cell::Mail, "mail cell")?;
                require(Cell::Desk, "desk cell")?;
                vars.push(VariableSpec::range("coffee", 2)?);
                vars.push(VariableSpec::range("mail", 2)?);
                (0.0, 0.0)
            }
            DomainKind::Taxi => {
                if landmarks.len() < 2 {
                    return Err(Error::InvalidMap(
                        "taxi map needs at least two landmarks".into(),
                    ));
                }
                if landmarks.len() != map.cells_where(|c| matches!(c, Cell::Landmark(_))).len()
                    || (1..=landmarks.len()).any(|k| {
                        let (x, y) = landmarks[k - 1];
                        map.get(x, y) != Cell::Landmark(k as u8)
                    })
                {
                    return Err(Error::InvalidMap(
                        "taxi landmarks must be numbered 1..n".into(),
                    ));
                }
                vars.push(VariableSpec::range("l", landmarks.len() as i64 + 1)?);
                vars.push(VariableSpec::range("p", 2)?);
                actions.extend(["pickup", "dropoff"]);
                (-1.0, -100.0)
            }
            DomainKind::Minecraft => {
                require(Cell::Wood, "wood cell")?;
                require(Cell::Stone, "stone cell")?;
                require(Cell::Iron, "iron cell")?;
                for name in ["wood", "stick", "stone", "iron"] {
                    vars.push(VariableSpec::range(name, 2)?);
                }
                vars.push(VariableSpec::range("axe", 3)?);
                actions.extend(["gather", "craft"]);
                (-1.0, -1.0)
            }
        };
        if map.free_cells().is_empty() {
            return Err(Error::InvalidMap("map has no free cells".into()));
        }
        Ok(DomainSpec {
            kind,
            map,
            schema: Schema::new(vars)?,
            actions,
            landmarks,
            move_success: 0.8,
            step_reward,
            goal_reward: 500.0,
            illegal_reward,
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn actions(&self) -> &[&'static str] {
        &self.actions
    }

    /// Taxi landmark cells; landmark `k` is at index `k - 1`.
    pub fn landmarks(&self) -> &[(usize, usize)] {
        &self.landmarks
    }

    /// Cell under a state's position.
    pub fn cell_of(&self, state: &State) -> (usize, usize) {
        (state.get(0) as usize, state.get(1) as usize)
    }

    fn apply_move(&self, next: &mut State, dir: usize) {
        let (dx, dy) = MOVES[dir];
        let (cx, cy) = self.cell_of(next);
        if self.map.passable(cx as i64 + dx, cy as i64 + dy) {
            next.set(0, next.get(0) + dx as f64);
            next.set(1, next.get(1) + dy as f64);
        }
    }

    /// Applies the interaction actions; returns whether the action was illegal.
    fn interact(&self, next: &mut State, action: usize) -> bool {
        let (cx, cy) = self.cell_of(next);
        let cell = self.map.get(cx, cy);
        match self.kind {
            DomainKind::Taxi => {
                let (l, p) = (next.get(2) as usize, next.get(3));
                if action == INTERACT {
                    if p == 0.0 && l >= 1 && self.landmarks[l - 1] == (cx, cy) {
                        next.set(2, 0.0);
                        next.set(3, 1.0);
                        return false;
                    }
                } else if p == 1.0 {
                    if let Cell::Landmark(k) = cell {
                        next.set(2, k as f64);
                        next.set(3, 0.0);
                        return false;
                    }
                }
                true
            }
            DomainKind::Minecraft => {
                const WOOD: usize = 2;
                const STICK: usize = 3;
                const STONE: usize = 4;
                const IRON: usize = 5;
                const AXE: usize = 6;
                if action == INTERACT {
                    match cell {
                        Cell::Wood => next.set(WOOD, 1.0),
                        Cell::Stone => next.set(STONE, 1.0),
                        Cell::Iron => next.set(IRON, 1.0),
                        _ => {}
                    }
                } else if next.get(WOOD) == 1.0 && next.get(STICK) == 0.0 {
                    next.set(WOOD, 0.0);
                    next.set(STICK, 1.0);
                } else if next.get(STICK) == 1.0 && next.get(AXE) == 0.0 {
                    if next.get(IRON) == 1.0 {
                        next.set(IRON, 0.0);
                        next.set(STICK, 0.0);
                        next.set(AXE, 2.0);
                    } else if next.get(STONE) == 1.0 {
                        next.set(STONE, 0.0);
                        next.set(STICK, 0.0);
                        next.set(AXE, 1.0);
                    }
                }
                false
            }
            _ => false,
        }
    }
}

impl Simulator for DomainSpec {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn num_actions(&self) -> usize {
        self.actions.len()
    }

    fn step_reward(&self) -> f64 {
        self.step_reward
    }

    fn step(
        &self,
        goal: &Goal,
        state: &State,
        action: usize,
        rng: &mut Rng,
    ) -> Result<StepOutcome> {
        if action >= self.actions.len() {
            return Err(Error::UnknownAction {
                action,
                available: self.actions.len(),
            });
        }
        let mut next = state.clone();
        let mut illegal = false;
        if action < 4 {
            let u: f64 = rng.gen();
            let dir = if u < self.move_success {
                action
            } else if u < 0.5 * (1.0 + self.move_success) {
                SLIPS[action][0]
            } else {
                SLIPS[action][1]
            };
            self.apply_move(&mut next, dir);
            if self.kind == DomainKind::Office {
                let (cx, cy) = self.cell_of(&next);
                match self.map.get(cx, cy) {
                    Cell::Coffee => next.set(2, 1.0),
                    Cell::Mail => next.set(3, 1.0),
                    _ => {}
                }
            }
        } else {
            illegal = self.interact(&mut next, action);
        }
        let done = goal.satisfied_by(&next);
        let reward = if done {
            self.goal_reward
        } else if illegal {
            self.illegal_reward
        } else {
            self.step_reward
        };
        Ok(StepOutcome {
            next_state: next,
            reward,
            done,
            illegal,
        })
    }
}
