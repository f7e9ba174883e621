use crate::cat::{Cat, NodeId};
use crate::error::{Error, Result};

use super::Hyper;

/// Action values over the leaves of one tree, indexed by node id.
///
/// Rows exist only for current leaves. Refining a leaf moves its row to the
/// new children, so each child starts from its parent's estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_actions: usize,
    values: Vec<f64>,
    live: Vec<bool>,
}

impl QTable {
    /// Zero-initialised table covering every leaf of `cat`.
    pub fn for_cat(cat: &Cat, n_actions: usize) -> Self {
        let mut q = QTable {
            n_actions,
            values: vec![0.0; cat.len() * n_actions],
            live: vec![false; cat.len()],
        };
        for leaf in cat.leaves() {
            q.live[leaf.index()] = true;
        }
        q
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn is_live(&self, n: NodeId) -> bool {
        self.live.get(n.index()).copied().unwrap_or(false)
    }

    /// Leaves with a row, in id order.
    pub fn live_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.live
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(i, _)| NodeId(i as u32))
    }

    #[inline]
    pub fn row(&self, n: NodeId) -> &[f64] {
        let i = n.index() * self.n_actions;
        &self.values[i..i + self.n_actions]
    }

    pub fn get(&self, n: NodeId, action: usize) -> f64 {
        self.row(n)[action]
    }

    pub fn set(&mut self, n: NodeId, action: usize, value: f64) {
        self.values[n.index() * self.n_actions + action] = value;
    }

    #[inline]
    pub fn max_value(&self, n: NodeId) -> f64 {
        self.row(n)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action; ties go to the lowest index.
    #[inline]
    pub fn argmax(&self, n: NodeId) -> usize {
        let row = self.row(n);
        let mut best = 0;
        for a in 1..row.len() {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }

    /// Moves `parent`'s row onto `children`.
    pub fn split(&mut self, parent: NodeId, children: &[NodeId]) {
        let needed = children.iter().map(|c| c.index() + 1).max().unwrap_or(0);
        if needed > self.live.len() {
            self.live.resize(needed, false);
            self.values.resize(needed * self.n_actions, 0.0);
        }
        let row: Vec<f64> = self.row(parent).to_vec();
        for &c in children {
            let i = c.index() * self.n_actions;
            self.values[i..i + self.n_actions].copy_from_slice(&row);
            self.live[c.index()] = true;
        }
        self.live[parent.index()] = false;
    }

    /// Brings the table in line with a tree that has been refined elsewhere
    /// (for example by a merge): every new leaf inherits its nearest live
    /// ancestor's row.
    pub fn sync_with(&mut self, cat: &Cat) {
        if cat.len() > self.live.len() {
            self.live.resize(cat.len(), false);
            self.values.resize(cat.len() * self.n_actions, 0.0);
        }
        for n in cat.node_ids() {
            if cat.is_leaf(n) && !self.live[n.index()] {
                let source = cat
                    .path_to(n)
                    .into_iter()
                    .rev()
                    .find(|&a| self.live[a.index()]);
                if let Some(src) = source {
                    let row = self.row(src).to_vec();
                    let i = n.index() * self.n_actions;
                    self.values[i..i + self.n_actions].copy_from_slice(&row);
                }
            }
        }
        for n in cat.node_ids() {
            self.live[n.index()] = cat.is_leaf(n);
        }
    }
}

/// One Q-learning backup on `leaf`; returns the TD error.
pub fn q_update(
    q: &mut QTable,
    leaf: NodeId,
    action: usize,
    reward: f64,
    next_leaf: NodeId,
    done: bool,
    hyper: &Hyper,
) -> Result<f64> {
    if !q.is_live(leaf) {
        return Err(Error::StaleLeaf(leaf.index()));
    }
    if !q.is_live(next_leaf) {
        return Err(Error::StaleLeaf(next_leaf.index()));
    }
    let bootstrap = if done {
        0.0
    } else {
        hyper.gamma * q.max_value(next_leaf)
    };
    let td = reward + bootstrap - q.get(leaf, action);
    let i = leaf.index() * q.n_actions + action;
    q.values[i] += hyper.alpha * td;
    Ok(td)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{Schema, VariableSpec};

    fn line() -> Cat {
        Cat::new(Schema::new(vec![VariableSpec::gridded("x", 0.0, 4.0, 1.0).unwrap()]).unwrap())
    }

    fn hyper(alpha: f64) -> Hyper {
        Hyper {
            alpha,
            gamma: 0.99,
            ..Hyper::default()
        }
    }

    #[test]
    fn update_arithmetic() {
        let cat = line();
        let root = cat.root();
        let mut q = QTable::for_cat(&cat, 2);
        q_update(&mut q, root, 0, -1.0, root, false, &hyper(0.05)).unwrap();
        assert_eq!(q.get(root, 0), -0.05);

        let mut q = QTable::for_cat(&cat, 2);
        q_update(&mut q, root, 1, 500.0, root, true, &hyper(0.05)).unwrap();
        assert_eq!(q.get(root, 1), 25.0);

        let mut q = QTable::for_cat(&cat, 2);
        q.set(root, 0, 3.0);
        q_update(&mut q, root, 0, 7.0, root, false, &hyper(0.0)).unwrap();
        assert_eq!(q.get(root, 0), 3.0);
    }

    #[test]
    fn split_copies_parent_row() {
        let mut cat = line();
        let root = cat.root();
        let mut q = QTable::for_cat(&cat, 3);
        q.set(root, 2, 4.0);
        q.set(root, 0, 1.0);
        let kids = cat.refine(root).unwrap();
        q.split(root, &kids);
        for &k in &kids {
            assert_eq!(q.row(k), &[1.0, 0.0, 4.0]);
            assert_eq!(q.argmax(k), 2);
        }
        assert!(matches!(
            q_update(&mut q, root, 0, 0.0, kids[0], false, &hyper(0.1)),
            Err(Error::StaleLeaf(0))
        ));
    }

    #[test]
    fn ties_pick_lowest_action() {
        let cat = line();
        let q = QTable::for_cat(&cat, 4);
        assert_eq!(q.argmax(cat.root()), 0);
    }

    #[test]
    fn sync_follows_external_refinement() {
        let mut cat = line();
        let root = cat.root();
        let mut q = QTable::for_cat(&cat, 2);
        q.set(root, 1, 9.0);
        let kids = cat.refine(root).unwrap();
        cat.refine(kids[0]).unwrap();
        q.sync_with(&cat);
        let live: Vec<NodeId> = q.live_nodes().collect();
        assert_eq!(live, cat.leaves().collect::<Vec<_>>());
        for n in live {
            assert_eq!(q.get(n, 1), 9.0);
        }
    }
}
