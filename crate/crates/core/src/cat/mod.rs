//! Conditional abstraction trees.
//!
//! A [`Cat`] is a rooted tree of [`AbstractState`]s. The root covers every
//! variable's full domain; refining a leaf bisects every splittable variable
//! at once, so a node has up to `2^m` children. The leaves partition the
//! state space and define the abstraction function [`Cat::leaf_of`].

mod ccat;
mod io;
mod region;

use std::collections::HashMap;

pub use ccat::{delta_distance, make_ccat, CCat};
pub use region::{AbstractState, Interval};

use crate::error::{Error, Result};
use crate::mdp::{Goal, Schema, State, VarDomain};

/// Index of a node inside one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatConfig {
    /// Continuous intervals this wide (or narrower) are atomic, unless the
    /// variable declares its own grid unit.
    pub min_resolution: f64,
}

impl Default for CatConfig {
    fn default() -> Self {
        Self {
            min_resolution: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
struct Split {
    vars: Vec<usize>,
    points: Vec<f64>,
    // indexed by a bit code: bit k set = upper half of `vars[k]`
    children: Vec<NodeId>,
}

#[derive(Debug, Clone)]
struct Node {
    region: AbstractState,
    parent: Option<NodeId>,
    depth: u32,
    split: Option<Split>,
}

#[derive(Debug, Clone)]
pub struct Cat {
    schema: Schema,
    config: CatConfig,
    nodes: Vec<Node>,
    index: HashMap<AbstractState, NodeId>,
    depth_max: u32,
    n_leaves: usize,
}

impl Cat {
    /// Single-node tree whose root covers the full state space.
    pub fn new(schema: Schema) -> Self {
        Self::with_config(schema, CatConfig::default())
    }

    pub fn with_config(schema: Schema, config: CatConfig) -> Self {
        let root = AbstractState::full(&schema);
        let mut index = HashMap::new();
        index.insert(root.clone(), NodeId(0));
        Self {
            schema,
            config,
            nodes: vec![Node {
                region: root,
                parent: None,
                depth: 0,
                split: None,
            }],
            index,
            depth_max: 0,
            n_leaves: 1,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn config(&self) -> CatConfig {
        self.config
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        self.n_leaves
    }

    pub fn depth_max(&self) -> u32 {
        self.depth_max
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        n.index() < self.nodes.len()
    }

    fn node(&self, n: NodeId) -> Result<&Node> {
        self.nodes
            .get(n.index())
            .ok_or_else(|| Error::NodeNotFound(format!("#{}", n.0)))
    }

    pub fn region(&self, n: NodeId) -> &AbstractState {
        &self.nodes[n.index()].region
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.nodes[n.index()].parent
    }

    pub fn depth(&self, n: NodeId) -> u32 {
        self.nodes[n.index()].depth
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.nodes[n.index()].split.is_none()
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        match &self.nodes[n.index()].split {
            Some(s) => &s.children,
            None => &[],
        }
    }

    /// Variables split at `n`, empty for leaves.
    pub fn split_vars(&self, n: NodeId) -> &[usize] {
        match &self.nodes[n.index()].split {
            Some(s) => &s.vars,
            None => &[],
        }
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&n| self.is_leaf(n))
    }

    /// Looks a node up by its region.
    pub fn find(&self, region: &AbstractState) -> Option<NodeId> {
        self.index.get(region).copied()
    }

    /// The unique leaf containing `state`.
    ///
    /// Panics if the state lies outside the schema.
    #[inline]
    pub fn leaf_of(&self, state: &State) -> NodeId {
        let mut n = NodeId(0);
        loop {
            let node = &self.nodes[n.index()];
            let Some(split) = &node.split else {
                return n;
            };
            let mut code = 0usize;
            for (k, (&var, &point)) in split.vars.iter().zip(&split.points).enumerate() {
                if self.schema.coord(state, var) >= point {
                    code |= 1 << k;
                }
            }
            n = split.children[code];
        }
    }

    /// Abstraction function: the region of the leaf containing `state`.
    pub fn abstract_state_of(&self, state: &State) -> Result<&AbstractState> {
        if !self.schema.contains(state) {
            return Err(Error::SchemaMismatch(
                "state outside the tree's schema".into(),
            ));
        }
        Ok(self.region(self.leaf_of(state)))
    }

    /// Path from the root to `n`, inclusive.
    pub fn path_to(&self, n: NodeId) -> Vec<NodeId> {
        let mut path = vec![n];
        let mut cur = n;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// `a` is an ancestor of `b` (or equal to it).
    pub fn is_ancestor_or_self(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            if self.depth(cur) <= self.depth(a) {
                return false;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Lowest common ancestor.
    pub fn lca(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.node(a)?;
        self.node(b)?;
        let (mut a, mut b) = (a, b);
        while self.depth(a) > self.depth(b) {
            a = self.parent(a).expect("non-root has a parent");
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b).expect("non-root has a parent");
        }
        while a != b {
            a = self.parent(a).expect("non-root has a parent");
            b = self.parent(b).expect("non-root has a parent");
        }
        Ok(a)
    }

    /// Same-parent nodes of `n`, excluding `n`.
    pub fn siblings(&self, n: NodeId) -> Vec<NodeId> {
        match self.parent(n) {
            Some(p) => self
                .children(p)
                .iter()
                .copied()
                .filter(|&c| c != n)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Depth of the deepest descendant of `n`, relative to `n`.
    pub fn subtree_depth(&self, n: NodeId) -> u32 {
        self.children(n)
            .iter()
            .map(|&c| 1 + self.subtree_depth(c))
            .max()
            .unwrap_or(0)
    }

    fn resolution(&self, var: usize) -> f64 {
        self.schema
            .var(var)
            .grid()
            .unwrap_or(self.config.min_resolution)
    }

    fn split_point(&self, var: usize, iv: Interval) -> Option<f64> {
        match self.schema.var(var).domain() {
            VarDomain::Continuous { grid, .. } => {
                if iv.width() <= self.resolution(var) {
                    return None;
                }
                let mid = 0.5 * (iv.lo + iv.hi);
                let point = match grid {
                    Some(g) => {
                        let snapped = (mid / g).floor() * g;
                        if snapped <= iv.lo {
                            iv.lo + g
                        } else {
                            snapped
                        }
                    }
                    None => mid,
                };
                (point > iv.lo && point < iv.hi).then_some(point)
            }
            VarDomain::Discrete { .. } => {
                let n = iv.width() as i64;
                (n > 1).then(|| iv.lo + ((n + 1) / 2) as f64)
            }
        }
    }

    /// Whether some variable of `n`'s region can still be split.
    pub fn is_splittable(&self, n: NodeId) -> bool {
        let region = self.region(n);
        (0..self.schema.len()).any(|v| self.split_point(v, region.interval(v)).is_some())
    }

    /// Splits leaf `n`, bisecting every splittable variable. Returns the new
    /// children in code order.
    pub fn refine(&mut self, n: NodeId) -> Result<Vec<NodeId>> {
        let node = self.node(n)?;
        if node.split.is_some() {
            return Err(Error::NodeNotFound(format!("#{} is not a leaf", n.0)));
        }
        let region = node.region.clone();
        let depth = node.depth + 1;
        let (vars, points): (Vec<usize>, Vec<f64>) = (0..self.schema.len())
            .filter_map(|v| self.split_point(v, region.interval(v)).map(|p| (v, p)))
            .unzip();
        if vars.is_empty() {
            return Err(Error::Unsplittable);
        }
        let mut children = Vec::with_capacity(1 << vars.len());
        for code in 0..(1usize << vars.len()) {
            let mut r = region.clone();
            for (k, (&v, &p)) in vars.iter().zip(&points).enumerate() {
                let iv = r.interval(v);
                let half = if code & (1 << k) != 0 {
                    Interval::new(p, iv.hi)
                } else {
                    Interval::new(iv.lo, p)
                };
                r.set_interval(v, half);
            }
            let id = NodeId(self.nodes.len() as u32);
            self.index.insert(r.clone(), id);
            self.nodes.push(Node {
                region: r,
                parent: Some(n),
                depth,
                split: None,
            });
            children.push(id);
        }
        self.nodes[n.index()].split = Some(Split {
            vars,
            points,
            children: children.clone(),
        });
        self.depth_max = self.depth_max.max(depth);
        self.n_leaves += children.len() - 1;
        Ok(children)
    }

    /// Refines leaves straddling the goal boundary until every leaf lies
    /// entirely inside or entirely outside the goal (as far as resolution
    /// allows). Returns the number of refinements.
    pub fn align_to_goal(&mut self, goal: &Goal) -> usize {
        let mut count = 0;
        let mut stack: Vec<NodeId> = self.leaves().collect();
        while let Some(n) = stack.pop() {
            let region = self.region(n);
            if region.within_goal(&self.schema, goal) || !region.meets_goal(&self.schema, goal) {
                continue;
            }
            if let Ok(children) = self.refine(n) {
                count += 1;
                stack.extend(children);
            }
        }
        count
    }

    /// Maximal nodes whose region lies entirely inside the goal.
    pub fn goal_nodes(&self, goal: &Goal) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            let region = self.region(n);
            if region.within_goal(&self.schema, goal) {
                out.push(n);
            } else if region.meets_goal(&self.schema, goal) {
                stack.extend(self.children(n).iter().copied());
            }
        }
        out.sort();
        out
    }

    /// Whether both trees share a root, schema and split configuration.
    pub fn same_lineage(&self, other: &Cat) -> bool {
        self.schema == other.schema
            && self.config == other.config
            && self.nodes[0].region == other.nodes[0].region
    }
}

/// Adopts every refinement of `option_cat` into `universal`.
///
/// When `option_cat` descends from `universal` the result equals
/// `option_cat`; otherwise it is the union of both refinements.
pub fn merge_cat(universal: &Cat, option_cat: &Cat) -> Result<Cat> {
    if !universal.same_lineage(option_cat) {
        return Err(Error::Lineage(
            "trees differ in schema, root or split config".into(),
        ));
    }
    let mut merged = universal.clone();
    for n in option_cat.node_ids() {
        let Some(split) = &option_cat.nodes[n.index()].split else {
            continue;
        };
        let target = merged.find(option_cat.region(n)).ok_or_else(|| {
            Error::Lineage(format!("node {} has no counterpart", option_cat.region(n)))
        })?;
        if merged.is_leaf(target) {
            merged.refine(target)?;
        }
        if merged.split_vars(target) != split.vars.as_slice() {
            return Err(Error::Lineage(format!(
                "conflicting splits at {}",
                option_cat.region(n)
            )));
        }
    }
    Ok(merged)
}

/// Context-independent distance weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaWeights {
    pub lca_level: f64,
    pub spread: f64,
}

impl Default for SigmaWeights {
    fn default() -> Self {
        Self {
            lca_level: 0.5,
            spread: 0.5,
        }
    }
}

/// Context-independent distance between two nodes: a weighted sum of
/// `depth_max - depth(lca) + 1` and the mean depth of `a` and `b` below
/// their lowest common ancestor.
pub fn sigma_distance(cat: &Cat, a: NodeId, b: NodeId, w: SigmaWeights) -> Result<f64> {
    let l = cat.lca(a, b)?;
    let dl = cat.depth(l) as f64;
    let level = cat.depth_max() as f64 - dl + 1.0;
    let spread = ((cat.depth(a) as f64 - dl) + (cat.depth(b) as f64 - dl)) / 2.0;
    Ok(w.lca_level * level + w.spread * spread)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mdp::{Constraint, VariableSpec};

    pub(crate) fn taxi_schema() -> Schema {
        Schema::new(vec![
            VariableSpec::continuous("x", 0.0, 5.0).unwrap(),
            VariableSpec::continuous("y", 0.0, 5.0).unwrap(),
            VariableSpec::range("l", 5).unwrap(),
            VariableSpec::range("p", 2).unwrap(),
        ])
        .unwrap()
    }

    pub(crate) fn state(schema: &Schema, v: &[f64]) -> State {
        schema.state(v.to_vec()).unwrap()
    }

    #[test]
    fn new_cat_is_single_root() {
        let cat = Cat::new(taxi_schema());
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.depth_max(), 0);
        assert_eq!(
            cat.region(cat.root()).describe(cat.schema()),
            "x:[0,5) y:[0,5) l:{0,1,2,3,4} p:{0,1}"
        );
        let s = state(cat.schema(), &[4.9, 0.1, 2.0, 1.0]);
        assert_eq!(cat.leaf_of(&s), cat.root());
    }

    #[test]
    fn refine_taxi_root_bisects_everything() {
        let mut cat = Cat::new(taxi_schema());
        let kids = cat.refine(cat.root()).unwrap();
        assert_eq!(kids.len(), 16);
        assert_eq!(cat.leaf_count(), 16);
        assert_eq!(cat.depth_max(), 1);
        let descs: Vec<String> = kids
            .iter()
            .map(|&k| cat.region(k).describe(cat.schema()))
            .collect();
        assert!(descs.contains(&"x:[0,2.5) y:[0,2.5) l:{0,1,2} p:{0}".to_string()));
        assert!(descs.contains(&"x:[2.5,5) y:[2.5,5) l:{3,4} p:{1}".to_string()));
    }

    #[test]
    fn figure_two_lookup() {
        let mut cat = Cat::new(taxi_schema());
        cat.refine(cat.root()).unwrap();
        let s = state(cat.schema(), &[2.6, 0.9, 3.0, 0.0]);
        let leaf = cat.leaf_of(&s);
        assert_eq!(
            cat.region(leaf).describe(cat.schema()),
            "x:[2.5,5) y:[0,2.5) l:{3,4} p:{0}"
        );
    }

    #[test]
    fn two_leaf_lookup() {
        let schema = Schema::new(vec![VariableSpec::continuous("x", 0.0, 5.0).unwrap()]).unwrap();
        let mut cat = Cat::new(schema);
        let kids = cat.refine(cat.root()).unwrap();
        let s = state(cat.schema(), &[3.0]);
        assert_eq!(cat.leaf_of(&s), kids[1]);
        assert_eq!(cat.region(kids[1]).interval(0), Interval::new(2.5, 5.0));
    }

    #[test]
    fn atomic_leaf_is_unsplittable() {
        let schema = Schema::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0).unwrap(),
            VariableSpec::range("p", 1).unwrap(),
        ])
        .unwrap();
        let mut cat = Cat::new(schema);
        assert!(!cat.is_splittable(cat.root()));
        assert!(matches!(cat.refine(cat.root()), Err(Error::Unsplittable)));
    }

    #[test]
    fn refine_rejects_internal_nodes() {
        let mut cat = Cat::new(taxi_schema());
        cat.refine(cat.root()).unwrap();
        assert!(cat.refine(cat.root()).is_err());
    }

    #[test]
    fn grid_variables_snap_to_cells() {
        let schema =
            Schema::new(vec![VariableSpec::gridded("x", 0.0, 24.0, 1.0).unwrap()]).unwrap();
        let mut cat = Cat::new(schema);
        let mut frontier = vec![cat.root()];
        while let Some(n) = frontier.pop() {
            if let Ok(kids) = cat.refine(n) {
                frontier.extend(kids);
            }
        }
        assert_eq!(cat.leaf_count(), 24);
        for leaf in cat.leaves() {
            let iv = cat.region(leaf).interval(0);
            assert_eq!(iv.width(), 1.0);
            assert_eq!(iv.lo.fract(), 0.0);
        }
    }

    #[test]
    fn lca_cases() {
        let mut cat = Cat::new(taxi_schema());
        let kids = cat.refine(cat.root()).unwrap();
        let root = cat.root();
        assert_eq!(cat.lca(root, kids[3]).unwrap(), root);
        assert_eq!(cat.lca(kids[3], kids[3]).unwrap(), kids[3]);
        assert_eq!(cat.lca(kids[3], kids[5]).unwrap(), root);
        let grand = cat.refine(kids[3]).unwrap();
        assert_eq!(cat.lca(grand[0], grand[1]).unwrap(), kids[3]);
        assert!(cat.lca(NodeId(999), root).is_err());
    }

    /// Chain tree: root -> a -> b -> c along one branch (depth_max 3).
    fn deep_tree() -> (Cat, Vec<NodeId>) {
        let schema = Schema::new(vec![VariableSpec::continuous("x", 0.0, 16.0).unwrap()]).unwrap();
        let mut cat = Cat::new(schema);
        let a = cat.refine(cat.root()).unwrap();
        let b = cat.refine(a[0]).unwrap();
        let c = cat.refine(b[0]).unwrap();
        let d = cat.refine(a[1]).unwrap();
        let e = cat.refine(d[1]).unwrap();
        (cat, vec![c[0], c[1], e[1]])
    }

    #[test]
    fn sigma_examples() {
        let (cat, leaves) = deep_tree();
        assert_eq!(cat.depth_max(), 3);
        let w = SigmaWeights::default();
        // siblings at depth 3 under an LCA at depth 2
        assert_eq!(sigma_distance(&cat, leaves[0], leaves[1], w).unwrap(), 1.5);
        // depth-3 leaves whose LCA is the root
        assert_eq!(sigma_distance(&cat, leaves[0], leaves[2], w).unwrap(), 3.5);
        assert_eq!(
            sigma_distance(&cat, leaves[2], leaves[0], w).unwrap(),
            sigma_distance(&cat, leaves[0], leaves[2], w).unwrap()
        );
        assert!(sigma_distance(&cat, NodeId(500), leaves[0], w).is_err());
    }

    #[test]
    fn merge_identity_and_adoption() {
        let mut universal = Cat::new(taxi_schema());
        universal.refine(universal.root()).unwrap();
        let same = merge_cat(&universal, &universal.clone()).unwrap();
        assert_eq!(same.len(), universal.len());

        let mut option = universal.clone();
        let leaf = option.leaves().next().unwrap();
        option.refine(leaf).unwrap();
        let merged = merge_cat(&universal, &option).unwrap();
        assert_eq!(merged.len(), option.len());
        assert_eq!(merged.leaf_count(), option.leaf_count());
        assert!(!merged.is_leaf(merged.find(option.region(leaf)).unwrap()));
    }

    #[test]
    fn merge_rejects_foreign_lineage() {
        let a = Cat::new(taxi_schema());
        let other = Schema::new(vec![VariableSpec::continuous("x", 0.0, 3.0).unwrap()]).unwrap();
        let b = Cat::new(other);
        assert!(matches!(merge_cat(&a, &b), Err(Error::Lineage(_))));
    }

    #[test]
    fn goal_alignment_isolates_goal_cell() {
        let schema = Schema::new(vec![
            VariableSpec::gridded("x", 0.0, 24.0, 1.0).unwrap(),
            VariableSpec::gridded("y", 0.0, 24.0, 1.0).unwrap(),
        ])
        .unwrap();
        let mut cat = Cat::new(schema);
        let goal = Goal::new(vec![
            Constraint::interval(0, 5.0, 6.0),
            Constraint::interval(1, 17.0, 18.0),
        ]);
        assert!(cat.goal_nodes(&goal).is_empty());
        cat.align_to_goal(&goal);
        let nodes = cat.goal_nodes(&goal);
        assert_eq!(nodes.len(), 1);
        assert_eq!(
            cat.region(nodes[0]).describe(cat.schema()),
            "x:[5,6) y:[17,18)"
        );
        for leaf in cat.leaves() {
            let r = cat.region(leaf);
            assert!(r.within_goal(cat.schema(), &goal) || !r.meets_goal(cat.schema(), &goal));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn leaves_partition_after_random_refinements(
                picks in proptest::collection::vec(0usize..1000, 0..30),
                pts in proptest::collection::vec((0.0f64..5.0, 0.0f64..5.0, 0i64..5, 0i64..2), 50),
            ) {
                let mut cat = Cat::new(taxi_schema());
                for p in picks {
                    let leaves: Vec<NodeId> = cat.leaves().filter(|&l| cat.is_splittable(l)).collect();
                    if leaves.is_empty() { break; }
                    let before = cat.leaf_count();
                    let kids = cat.refine(leaves[p % leaves.len()]).unwrap();
                    prop_assert_eq!(cat.leaf_count(), before + kids.len() - 1);
                }
                let schema = cat.schema().clone();
                for (x, y, l, p) in pts {
                    let s = state(&schema, &[x, y, l as f64, p as f64]);
                    let containing: Vec<NodeId> = cat.leaves()
                        .filter(|&n| cat.region(n).contains_state(&schema, &s))
                        .collect();
                    prop_assert_eq!(containing.len(), 1);
                    prop_assert_eq!(containing[0], cat.leaf_of(&s));
                }
            }

            #[test]
            fn sigma_shrinks_with_deeper_lca(picks in proptest::collection::vec(0usize..1000, 1..12)) {
                let mut cat = Cat::new(taxi_schema());
                for p in picks {
                    let leaves: Vec<NodeId> = cat.leaves().filter(|&l| cat.is_splittable(l)).collect();
                    if leaves.is_empty() { break; }
                    cat.refine(leaves[p % leaves.len()]).unwrap();
                }
                // for two nodes at fixed depths, a deeper LCA gives a smaller first term
                let d = cat.depth_max() as f64;
                let ids: Vec<NodeId> = cat.node_ids().collect();
                for &a in ids.iter().take(20) {
                    for &b in ids.iter().take(20) {
                        let l = cat.lca(a, b).unwrap();
                        let s = sigma_distance(&cat, a, b, SigmaWeights::default()).unwrap();
                        let term1 = d - cat.depth(l) as f64 + 1.0;
                        prop_assert!(term1 >= 1.0);
                        prop_assert!(s >= 0.5 * term1);
                    }
                }
            }
        }
    }
}
