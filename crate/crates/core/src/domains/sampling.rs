use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};

use super::{Cell, DomainKind, DomainSpec, Simulator};
use crate::error::{Error, Result};
use crate::mdp::{Constraint, Goal, Task, TaskStream};
use crate::Rng;

const MAX_ATTEMPTS: usize = 1000;
const OFFSET_STEPS: u32 = 1 << 20;

/// Samples one solvable task: a start position uniform over free space plus
/// the domain's goal narrative (goal cell, desk, passenger route or axe).
pub fn sample_task(spec: &DomainSpec, rng: &mut Rng) -> Result<Task> {
    let map = spec.map();
    let starts = map.cells_where(|c| matches!(c, Cell::Free | Cell::Landmark(_)));
    if starts.is_empty() {
        return Err(Error::SamplerExhausted {
            attempts: 0,
            reason: "map has no free start cell".into(),
        });
    }
    let mut last_reason = String::new();
    for _ in 0..MAX_ATTEMPTS {
        let &(sx, sy) = starts.choose(rng).expect("non-empty");
        // sub-cell offsets are multiples of 2^-20 so moves stay exact
        let ox = rng.gen_range(0..OFFSET_STEPS) as f64 / OFFSET_STEPS as f64;
        let oy = rng.gen_range(0..OFFSET_STEPS) as f64 / OFFSET_STEPS as f64;
        let pos = [sx as f64 + ox, sy as f64 + oy];
        let reach = map.reachable_from(sx, sy);
        let reachable =
            |cells: &[(usize, usize)]| cells.iter().any(|&(x, y)| reach[map.index(x, y)]);
        let (extra, goal, reward_id): (Vec<f64>, Goal, String) = match spec.kind() {
            DomainKind::Maze | DomainKind::FourRooms => {
                let free = map.free_cells();
                let &(gx, gy) = free.choose(rng).expect("non-empty");
                if (gx, gy) == (sx, sy) || !reach[map.index(gx, gy)] {
                    last_reason = "goal cell equals start or is unreachable".into();
                    continue;
                }
                (
                    vec![],
                    cell_goal(gx, gy, vec![]),
                    spec.kind().id().to_string(),
                )
            }
            DomainKind::Office => {
                let desks = map.cells_where(|c| c == Cell::Desk);
                let &(dx, dy) = desks.choose(rng).expect("validated");
                let coffee = map.cells_where(|c| c == Cell::Coffee);
                let mail = map.cells_where(|c| c == Cell::Mail);
                if !reach[map.index(dx, dy)] || !reachable(&coffee) || !reachable(&mail) {
                    last_reason = "desk, coffee or mail unreachable".into();
                    continue;
                }
                let items = vec![Constraint::equals(2, 1), Constraint::equals(3, 1)];
                (vec![0.0, 0.0], cell_goal(dx, dy, items), "office".into())
            }
            DomainKind::Taxi => {
                let n = spec.landmarks().len();
                let pick = rng.gen_range(1..=n);
                let mut dest = rng.gen_range(1..n);
                if dest >= pick {
                    dest += 1;
                }
                if !reachable(&[spec.landmarks()[pick - 1]])
                    || !reachable(&[spec.landmarks()[dest - 1]])
                {
                    last_reason = "landmark unreachable".into();
                    continue;
                }
                let goal = Goal::new(vec![
                    Constraint::equals(2, dest as i64),
                    Constraint::equals(3, 0),
                ]);
                (vec![pick as f64, 0.0], goal, "taxi".into())
            }
            DomainKind::Minecraft => {
                let iron = rng.gen_bool(0.5);
                let resource = if iron { Cell::Iron } else { Cell::Stone };
                if !reachable(&map.cells_where(|c| c == Cell::Wood))
                    || !reachable(&map.cells_where(|c| c == resource))
                {
                    last_reason = "wood or axe resource unreachable".into();
                    continue;
                }
                let target = if iron { 2 } else { 1 };
                let name = if iron {
                    "minecraft-iron"
                } else {
                    "minecraft-stone"
                };
                (
                    vec![0.0; 5],
                    Goal::new(vec![Constraint::equals(6, target)]),
                    name.into(),
                )
            }
        };
        let mut values = pos.to_vec();
        values.extend(extra);
        let initial_state = spec.schema().state(values)?;
        if goal.satisfied_by(&initial_state) {
            last_reason = "start already satisfies the goal".into();
            continue;
        }
        return Ok(Task {
            initial_state,
            goal,
            reward_id,
        });
    }
    Err(Error::SamplerExhausted {
        attempts: MAX_ATTEMPTS,
        reason: last_reason,
    })
}

fn cell_goal(x: usize, y: usize, mut rest: Vec<Constraint>) -> Goal {
    let mut cs = vec![
        Constraint::interval(0, x as f64, x as f64 + 1.0),
        Constraint::interval(1, y as f64, y as f64 + 1.0),
    ];
    cs.append(&mut rest);
    Goal::new(cs)
}

/// Samples `n` tasks in order from a generator seeded with `seed`.
pub fn sample_stream(spec: &DomainSpec, seed: u64, n: usize, budget: u64) -> Result<TaskStream> {
    let mut rng = Rng::seed_from_u64(seed);
    let tasks = (0..n)
        .map(|_| sample_task(spec, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let stream = TaskStream {
        domain_id: spec.kind().id().to_string(),
        seed,
        schema: spec.schema().clone(),
        tasks,
        per_task_budget: budget,
    };
    stream.validate()?;
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{make_domain, GridMap, SizeConfig};

    #[test]
    fn taxi_passenger_differs_from_destination() {
        let d = make_domain(DomainKind::Taxi, SizeConfig::Full).unwrap();
        let mut rng = Rng::seed_from_u64(5);
        for _ in 0..200 {
            let t = sample_task(&d, &mut rng).unwrap();
            let pick = t.initial_state.get(2);
            assert!(pick >= 1.0);
            assert!(!t.goal.constraints[0].admits(pick));
            assert_eq!(t.initial_state.get(3), 0.0);
        }
    }

    #[test]
    fn minecraft_targets_both_axes() {
        let d = make_domain(DomainKind::Minecraft, SizeConfig::Full).unwrap();
        let mut rng = Rng::seed_from_u64(5);
        let ids: std::collections::BTreeSet<String> = (0..50)
            .map(|_| sample_task(&d, &mut rng).unwrap().reward_id)
            .collect();
        assert_eq!(
            ids.into_iter().collect::<Vec<_>>(),
            ["minecraft-iron", "minecraft-stone"]
        );
    }

    #[test]
    fn same_seed_same_stream() {
        for kind in DomainKind::ALL {
            let d = make_domain(kind, SizeConfig::Full).unwrap();
            let a = sample_stream(&d, 42, 20, 1000).unwrap();
            let b = sample_stream(&d, 42, 20, 1000).unwrap();
            assert_eq!(a.to_record(), b.to_record());
            for t in &a.tasks {
                let (x, y) = d.cell_of(&t.initial_state);
                assert_ne!(d.map().get(x, y), Cell::Wall);
            }
        }
    }

    #[test]
    fn unsolvable_map_exhausts_sampler() {
        // a single free cell leaves no distinct goal cell
        let map: GridMap = "#.#\n".parse().unwrap();
        let d = DomainSpec::from_map(DomainKind::Maze, map).unwrap();
        let mut rng = Rng::seed_from_u64(1);
        assert!(matches!(
            sample_task(&d, &mut rng),
            Err(Error::SamplerExhausted { attempts: 1000, .. })
        ));
    }
}
