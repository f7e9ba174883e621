//! Best-first search over the option graph laid on top of the universal
//! abstraction tree, and conversion of found paths into option plans.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cat::{sigma_distance, AbstractState, Cat, NodeId, SigmaWeights};
use crate::error::{Error, Result};
use crate::mdp::{Goal, State};
use crate::options::{covers, OptionModel, OptionSignature};

/// Edge costs and switches of the search graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub option_cost: f64,
    /// Whether parent/child edges may bridge gaps between options.
    pub tree_edges: bool,
    pub sigma: SigmaWeights,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            option_cost: 1.0,
            tree_edges: true,
            sigma: SigmaWeights::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Executes the option with this id.
    Option(usize),
    /// Ancestor-level copy of an option edge.
    Lifted(usize),
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub cost: f64,
    pub kind: EdgeKind,
}

/// The universal tree overlaid with option, lifted and tree edges.
///
/// Option edges leave every initiation node. Every edge also applies from
/// any descendant of its source, which the search handles by looking at
/// ancestors when expanding a vertex.
#[derive(Debug)]
pub struct PlannableCat<'a> {
    cat: &'a Cat,
    config: PlannerConfig,
    out: Vec<Vec<Edge>>,
}

impl<'a> PlannableCat<'a> {
    pub fn build(cat: &'a Cat, model: &OptionModel, config: PlannerConfig) -> Result<Self> {
        Self::build_excluding(cat, model, config, &[])
    }

    /// Like [`PlannableCat::build`] but without edges for the `excluded` options.
    pub fn build_excluding(
        cat: &'a Cat,
        model: &OptionModel,
        config: PlannerConfig,
        excluded: &[usize],
    ) -> Result<Self> {
        let depth_max = cat.depth_max() as f64;
        let mut out: Vec<Vec<Edge>> = vec![Vec::new(); cat.len()];
        let resolve = |r: &AbstractState| {
            cat.find(r)
                .ok_or_else(|| Error::NodeNotFound(r.to_string()))
        };
        for o in model.options().iter().filter(|o| !excluded.contains(&o.id)) {
            let inits = o
                .signature
                .initiation
                .iter()
                .map(resolve)
                .collect::<Result<Vec<_>>>()?;
            let terms = o
                .signature
                .termination
                .iter()
                .map(resolve)
                .collect::<Result<Vec<_>>>()?;
            for &i in &inits {
                for &t in &terms {
                    out[i.index()].push(Edge {
                        from: i,
                        to: t,
                        cost: config.option_cost,
                        kind: EdgeKind::Option(o.id),
                    });
                    let (mut a, mut b) = (i, t);
                    while let (Some(pa), Some(pb)) = (cat.parent(a), cat.parent(b)) {
                        if pa == pb
                            || cat.is_ancestor_or_self(pa, pb)
                            || cat.is_ancestor_or_self(pb, pa)
                        {
                            break;
                        }
                        let level = cat.depth(pa).min(cat.depth(pb)) as f64;
                        out[pa.index()].push(Edge {
                            from: pa,
                            to: pb,
                            cost: config.option_cost + depth_max - level,
                            kind: EdgeKind::Lifted(o.id),
                        });
                        a = pa;
                        b = pb;
                    }
                }
            }
        }
        if config.tree_edges {
            for n in cat.node_ids() {
                for &c in cat.children(n) {
                    let cost = 1.0 + depth_max;
                    out[n.index()].push(Edge {
                        from: n,
                        to: c,
                        cost,
                        kind: EdgeKind::Tree,
                    });
                    out[c.index()].push(Edge {
                        from: c,
                        to: n,
                        cost,
                        kind: EdgeKind::Tree,
                    });
                }
            }
        }
        Ok(PlannableCat { cat, config, out })
    }

    pub fn cat(&self) -> &'a Cat {
        self.cat
    }

    /// Edges stored at `n`, without ancestor expansion.
    pub fn edges_from(&self, n: NodeId) -> &[Edge] {
        &self.out[n.index()]
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Edges usable at `n`: its own edges plus those of its ancestors, since a
    /// state in `n` is also in every ancestor.
    pub fn successors(&self, n: NodeId) -> impl Iterator<Item = Edge> + '_ {
        let own = self.out[n.index()].iter().copied();
        let mut anc = Vec::new();
        let mut cur = self.cat.parent(n);
        while let Some(a) = cur {
            anc.push(a);
            cur = self.cat.parent(a);
        }
        let inherited = anc.into_iter().flat_map(move |a| {
            self.out[a.index()]
                .iter()
                .filter(move |e| !self.cat.is_ancestor_or_self(e.to, n))
                .map(move |e| Edge { from: n, ..*e })
        });
        own.chain(inherited)
    }
}

/// One step of an option plan.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanStep {
    /// A learned option from the model.
    Option(usize),
    /// A gap to be bridged by learning a new option.
    Signature(OptionSignature),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionPlan {
    pub start: AbstractState,
    pub goals: Vec<AbstractState>,
    pub steps: Vec<PlanStep>,
    /// Search cost of the path the plan was made from.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    seq: u64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then on insertion order
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn in_goal(cat: &Cat, n: NodeId, goals: &[NodeId]) -> bool {
    goals.iter().any(|&g| cat.is_ancestor_or_self(g, n))
}

/// A* from `start` to any node inside `goals`, with the smallest
/// context-independent distance to a goal as heuristic. Returns the edges of
/// the path found.
pub fn search(pc: &PlannableCat<'_>, start: NodeId, goals: &[NodeId]) -> Result<Option<Vec<Edge>>> {
    let cat = pc.cat;
    if !cat.contains_node(start) {
        return Err(Error::NodeNotFound(format!("#{}", start.0)));
    }
    if goals.is_empty() {
        return Ok(None);
    }
    let mut h_cache: Vec<Option<f64>> = vec![None; cat.len()];
    let mut h = |n: NodeId| -> Result<f64> {
        if let Some(v) = h_cache[n.index()] {
            return Ok(v);
        }
        let mut best = f64::INFINITY;
        for &g in goals {
            best = best.min(sigma_distance(cat, n, g, pc.config.sigma)?);
        }
        h_cache[n.index()] = Some(best);
        Ok(best)
    };
    let mut g_cost = vec![f64::INFINITY; cat.len()];
    let mut came: Vec<Option<Edge>> = vec![None; cat.len()];
    let mut closed = vec![false; cat.len()];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    g_cost[start.index()] = 0.0;
    heap.push(Entry {
        f: h(start)?,
        seq,
        node: start,
    });
    while let Some(Entry { node, .. }) = heap.pop() {
        if closed[node.index()] {
            continue;
        }
        closed[node.index()] = true;
        if in_goal(cat, node, goals) {
            let mut path = Vec::new();
            let mut cur = node;
            while let Some(e) = came[cur.index()] {
                path.push(e);
                cur = e.from;
            }
            path.reverse();
            return Ok(Some(path));
        }
        for e in pc.successors(node) {
            if closed[e.to.index()] {
                continue;
            }
            let g = g_cost[node.index()] + e.cost;
            if g < g_cost[e.to.index()] {
                g_cost[e.to.index()] = g;
                came[e.to.index()] = Some(e);
                seq += 1;
                heap.push(Entry {
                    f: g + h(e.to)?,
                    seq,
                    node: e.to,
                });
            }
        }
    }
    Ok(None)
}

/// Cheapest path using tree edges only.
fn tree_path(cat: &Cat, start: NodeId, goals: &[NodeId]) -> Result<Option<Vec<Edge>>> {
    let cost = 1.0 + cat.depth_max() as f64;
    let mut best: Option<Vec<Edge>> = None;
    for &g in goals {
        let l = cat.lca(start, g)?;
        let mut path = Vec::new();
        let mut cur = start;
        while cur != l {
            let p = cat.parent(cur).expect("below the lca");
            path.push(Edge {
                from: cur,
                to: p,
                cost,
                kind: EdgeKind::Tree,
            });
            cur = p;
        }
        let mut down = Vec::new();
        let mut cur = g;
        while cur != l {
            let p = cat.parent(cur).expect("below the lca");
            down.push(Edge {
                from: p,
                to: cur,
                cost,
                kind: EdgeKind::Tree,
            });
            cur = p;
        }
        path.extend(down.into_iter().rev());
        if best.as_ref().is_none_or(|b| path.len() < b.len()) {
            best = Some(path);
        }
    }
    Ok(best)
}

pub fn path_cost(path: &[Edge]) -> f64 {
    path.iter().map(|e| e.cost).sum()
}

/// Plans from the node `start` to any of `goals` (nodes of `cat`).
///
/// Returns an empty plan when `start` already lies inside a goal and `None`
/// when no path exists. A path costlier than the pure tree path is replaced
/// by the tree path.
pub fn compute_option_plan(
    model: &OptionModel,
    cat: &Cat,
    start: NodeId,
    goals: &[NodeId],
    config: PlannerConfig,
) -> Result<Option<OptionPlan>> {
    compute_option_plan_excluding(model, cat, start, goals, config, &[])
}

/// [`compute_option_plan`] ignoring the `excluded` options.
pub fn compute_option_plan_excluding(
    model: &OptionModel,
    cat: &Cat,
    start: NodeId,
    goals: &[NodeId],
    config: PlannerConfig,
    excluded: &[usize],
) -> Result<Option<OptionPlan>> {
    let goal_regions: Vec<AbstractState> = goals.iter().map(|&g| cat.region(g).clone()).collect();
    if in_goal(cat, start, goals) {
        return Ok(Some(OptionPlan {
            start: cat.region(start).clone(),
            goals: goal_regions,
            steps: Vec::new(),
            cost: 0.0,
        }));
    }
    let pc = PlannableCat::build_excluding(cat, model, config, excluded)?;
    let Some(mut path) = search(&pc, start, goals)? else {
        return Ok(None);
    };
    if config.tree_edges {
        if let Some(tp) = tree_path(cat, start, goals)? {
            if path_cost(&tp) < path_cost(&path) {
                path = tp;
            }
        }
    }
    Ok(Some(refine_plan(cat, start, goals, &path)))
}

/// Turns a search path into a plan: option edges become their options and
/// each maximal run of lifted or tree edges becomes one signature from the
/// run's first vertex to its last. A run that only climbs to an ancestor is
/// dropped, since its start already lies inside its end. A final run that
/// reaches a goal targets every goal node.
pub fn refine_plan(cat: &Cat, start: NodeId, goals: &[NodeId], path: &[Edge]) -> OptionPlan {
    let goal_regions: Vec<AbstractState> = goals.iter().map(|&g| cat.region(g).clone()).collect();
    let mut steps = Vec::new();
    let mut run: Option<(NodeId, NodeId)> = None;
    let flush = |run: &mut Option<(NodeId, NodeId)>, steps: &mut Vec<PlanStep>, last: bool| {
        if let Some((from, to)) = run.take() {
            if cat.is_ancestor_or_self(to, from) {
                return;
            }
            let termination = if last && in_goal(cat, to, goals) {
                goal_regions.clone()
            } else {
                vec![cat.region(to).clone()]
            };
            steps.push(PlanStep::Signature(OptionSignature {
                initiation: vec![cat.region(from).clone()],
                termination,
            }));
        }
    };
    for e in path {
        match e.kind {
            EdgeKind::Option(id) => {
                flush(&mut run, &mut steps, false);
                steps.push(PlanStep::Option(id));
            }
            EdgeKind::Lifted(_) | EdgeKind::Tree => {
                run = Some(match run {
                    Some((from, _)) => (from, e.to),
                    None => (e.from, e.to),
                });
            }
        }
    }
    flush(&mut run, &mut steps, true);
    OptionPlan {
        start: cat.region(start).clone(),
        goals: goal_regions,
        steps,
        cost: path_cost(path),
    }
}

/// Cold-start signature from the leaf of `state` to the goal nodes.
pub fn invent_option_signature(cat: &Cat, state: &State, goal: &Goal) -> Result<OptionSignature> {
    let goals = cat.goal_nodes(goal);
    if goals.is_empty() {
        return Err(Error::InvalidSignature(
            "no tree node lies inside the goal".into(),
        ));
    }
    OptionSignature::new(
        vec![cat.abstract_state_of(state)?.clone()],
        goals.iter().map(|&g| cat.region(g).clone()).collect(),
    )
}

/// Checks that a plan starts at its start region, that consecutive steps
/// connect and that it ends inside a goal region.
pub fn validate_plan(plan: &OptionPlan, model: &OptionModel) -> Result<()> {
    let bad = |m: String| Err(Error::Invalid(m));
    let mut at: Vec<AbstractState> = vec![plan.start.clone()];
    for (k, step) in plan.steps.iter().enumerate() {
        let sig = match step {
            PlanStep::Option(id) => match model.get(*id) {
                Some(o) => &o.signature,
                None => return bad(format!("step {k}: option {id} is not in the model")),
            },
            PlanStep::Signature(s) => s,
        };
        let bridged = matches!(step, PlanStep::Signature(_)) && sig.initiation == at;
        if !bridged && !covers(&sig.initiation, &at) {
            return bad(format!(
                "step {k} cannot start where the previous step ended"
            ));
        }
        at = sig.termination.clone();
    }
    if !covers(&plan.goals, &at) {
        return bad("plan does not end inside the goal".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catrl::Learner;
    use crate::mdp::{Schema, VariableSpec};
    use crate::options::{AbstractOption, Provenance};

    fn line_cat() -> Cat {
        let schema = Schema::new(vec![VariableSpec::gridded("x", 0.0, 8.0, 1.0).unwrap()]).unwrap();
        let mut cat = Cat::new(schema);
        let kids = cat.refine(cat.root()).unwrap();
        for k in kids {
            cat.refine(k).unwrap();
        }
        cat
    }

    fn add(model: &mut OptionModel, cat: &Cat, init: &[u32], term: &[u32]) -> usize {
        let r = |ids: &[u32]| ids.iter().map(|&i| cat.region(NodeId(i)).clone()).collect();
        model.add(AbstractOption {
            id: 0,
            signature: OptionSignature::new(r(init), r(term)).unwrap(),
            learner: Learner::new(cat.clone(), 2),
            provenance: Provenance::default(),
            success: 1.0,
            stepmax: 10,
            needs_finetune: false,
        })
    }

    // nodes: 0 = [0,8), 1 = [0,4), 2 = [4,8), 3 = [0,2), 4 = [2,4), 5 = [4,6), 6 = [6,8)

    #[test]
    fn empty_model_has_only_tree_edges() {
        let cat = line_cat();
        let pc = PlannableCat::build(&cat, &OptionModel::new(), PlannerConfig::default()).unwrap();
        assert_eq!(pc.edge_count(), 2 * (cat.len() - 1));
        let pc = PlannableCat::build(
            &cat,
            &OptionModel::new(),
            PlannerConfig {
                tree_edges: false,
                ..PlannerConfig::default()
            },
        )
        .unwrap();
        assert_eq!(pc.edge_count(), 0);
    }

    #[test]
    fn option_edges_pair_every_endpoint() {
        let cat = line_cat();
        let mut m = OptionModel::new();
        add(&mut m, &cat, &[3, 4], &[5]);
        let cfg = PlannerConfig {
            tree_edges: false,
            ..PlannerConfig::default()
        };
        let pc = PlannableCat::build(&cat, &m, cfg).unwrap();
        let option_edges: Vec<Edge> = cat
            .node_ids()
            .flat_map(|n| pc.edges_from(n).to_vec())
            .filter(|e| matches!(e.kind, EdgeKind::Option(_)))
            .collect();
        assert_eq!(option_edges.len(), 2);
        let lifted: Vec<Edge> = cat
            .node_ids()
            .flat_map(|n| pc.edges_from(n).to_vec())
            .filter(|e| matches!(e.kind, EdgeKind::Lifted(_)))
            .collect();
        assert_eq!(lifted.len(), 2);
        for e in lifted {
            assert_eq!((e.from, e.to), (NodeId(1), NodeId(2)));
            assert!(e.cost > cfg.option_cost);
        }
    }

    #[test]
    fn dangling_endpoint_rejected() {
        let cat = line_cat();
        let mut m = OptionModel::new();
        let mut deeper = cat.clone();
        deeper.refine(NodeId(3)).unwrap();
        add(&mut m, &deeper, &[7], &[5]);
        assert!(matches!(
            PlannableCat::build(&cat, &m, PlannerConfig::default()),
            Err(Error::NodeNotFound(_))
        ));
    }

    #[test]
    fn start_in_goal_gives_empty_plan() {
        let cat = line_cat();
        let plan = compute_option_plan(
            &OptionModel::new(),
            &cat,
            NodeId(3),
            &[NodeId(1)],
            PlannerConfig::default(),
        )
        .unwrap()
        .unwrap();
        assert!(plan.steps.is_empty());
    }

    #[test]
    fn chains_two_composable_options() {
        let cat = line_cat();
        let mut m = OptionModel::new();
        let a = add(&mut m, &cat, &[3], &[4]);
        let b = add(&mut m, &cat, &[4], &[6]);
        let plan = compute_option_plan(&m, &cat, NodeId(3), &[NodeId(6)], PlannerConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(plan.steps, vec![PlanStep::Option(a), PlanStep::Option(b)]);
        validate_plan(&plan, &m).unwrap();
    }

    #[test]
    fn tree_only_path_is_one_signature() {
        let cat = line_cat();
        let plan = compute_option_plan(
            &OptionModel::new(),
            &cat,
            NodeId(3),
            &[NodeId(6)],
            PlannerConfig::default(),
        )
        .unwrap()
        .unwrap();
        assert_eq!(
            plan.steps,
            vec![PlanStep::Signature(OptionSignature {
                initiation: vec![cat.region(NodeId(3)).clone()],
                termination: vec![cat.region(NodeId(6)).clone()],
            })]
        );
        validate_plan(&plan, &OptionModel::new()).unwrap();
    }

    #[test]
    fn runs_between_options_collapse() {
        let cat = line_cat();
        let t = |from: u32, to: u32| Edge {
            from: NodeId(from),
            to: NodeId(to),
            cost: 3.0,
            kind: EdgeKind::Tree,
        };
        let o = |from: u32, to: u32, id: usize| Edge {
            from: NodeId(from),
            to: NodeId(to),
            cost: 1.0,
            kind: EdgeKind::Option(id),
        };
        let path = [o(3, 4, 0), t(4, 1), t(1, 0), t(0, 2), t(2, 5), o(5, 6, 1)];
        let plan = refine_plan(&cat, NodeId(3), &[NodeId(6)], &path);
        assert_eq!(plan.steps.len(), 3);
        assert_eq!(plan.steps[0], PlanStep::Option(0));
        assert_eq!(
            plan.steps[1],
            PlanStep::Signature(OptionSignature {
                initiation: vec![cat.region(NodeId(4)).clone()],
                termination: vec![cat.region(NodeId(5)).clone()],
            })
        );
        assert_eq!(plan.steps[2], PlanStep::Option(1));
        let pure = [o(3, 4, 0), o(4, 6, 1)];
        let plan = refine_plan(&cat, NodeId(3), &[NodeId(6)], &pure);
        assert_eq!(plan.steps, vec![PlanStep::Option(0), PlanStep::Option(1)]);
    }

    #[test]
    fn option_applies_from_descendant() {
        let mut cat = line_cat();
        cat.refine(NodeId(3)).unwrap();
        let mut m = OptionModel::new();
        let a = add(&mut m, &cat, &[3], &[6]);
        // start at [0,1), a child of the initiation node
        let plan = compute_option_plan(&m, &cat, NodeId(7), &[NodeId(6)], PlannerConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(plan.steps, vec![PlanStep::Option(a)]);
        validate_plan(&plan, &m).unwrap();
    }

    #[test]
    fn no_path_without_tree_edges() {
        let cat = line_cat();
        let cfg = PlannerConfig {
            tree_edges: false,
            ..PlannerConfig::default()
        };
        assert!(
            compute_option_plan(&OptionModel::new(), &cat, NodeId(3), &[NodeId(6)], cfg)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn cold_start_signature_from_root_leaf() {
        let schema = Schema::new(vec![VariableSpec::gridded("x", 0.0, 8.0, 1.0).unwrap()]).unwrap();
        let mut cat = Cat::new(schema.clone());
        let goal = Goal::new(vec![crate::mdp::Constraint::interval(0, 4.0, 8.0)]);
        assert!(invent_option_signature(&cat, &schema.state(vec![0.5]).unwrap(), &goal).is_err());
        cat.align_to_goal(&goal);
        let sig = invent_option_signature(&cat, &schema.state(vec![0.5]).unwrap(), &goal).unwrap();
        assert_eq!(sig.initiation, vec![cat.region(NodeId(1)).clone()]);
        assert_eq!(sig.termination, vec![cat.region(NodeId(2)).clone()]);
    }

    #[test]
    fn validator_rejects_broken_chain() {
        let cat = line_cat();
        let mut m = OptionModel::new();
        let a = add(&mut m, &cat, &[3], &[4]);
        let b = add(&mut m, &cat, &[5], &[6]);
        let plan = OptionPlan {
            start: cat.region(NodeId(3)).clone(),
            goals: vec![cat.region(NodeId(6)).clone()],
            steps: vec![PlanStep::Option(a), PlanStep::Option(b)],
            cost: 2.0,
        };
        assert!(validate_plan(&plan, &m).is_err());
        let missing = OptionPlan {
            steps: vec![PlanStep::Option(99)],
            ..plan
        };
        assert!(validate_plan(&missing, &m).is_err());
    }
}
