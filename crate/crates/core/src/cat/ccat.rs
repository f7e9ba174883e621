use super::{Cat, NodeId};
use crate::error::{Error, Result};
use crate::mdp::State;

/// Context-specific view of a [`Cat`]: the nodes whose intervals on every
/// context variable contain the conditioning state's value.
#[derive(Debug, Clone)]
pub struct CCat<'a> {
    cat: &'a Cat,
    retained: Vec<bool>,
    context: Vec<(usize, f64)>,
}

/// Conditions `cat` on the values `state` assigns to `context_vars`.
pub fn make_ccat<'a>(cat: &'a Cat, state: &State, context_vars: &[usize]) -> Result<CCat<'a>> {
    if let Some(&v) = context_vars.iter().find(|&&v| v >= cat.schema().len()) {
        return Err(Error::SchemaMismatch(format!(
            "context variable {v} not in schema"
        )));
    }
    let coords: Vec<(usize, f64)> = context_vars
        .iter()
        .map(|&v| (v, cat.schema().coord(state, v)))
        .collect();
    let mut retained = vec![false; cat.len()];
    // ancestors are visited first, so closure under ancestors holds by construction
    let mut stack = vec![cat.root()];
    while let Some(n) = stack.pop() {
        let region = cat.region(n);
        if coords.iter().all(|&(v, c)| region.interval(v).contains(c)) {
            retained[n.index()] = true;
            stack.extend(cat.children(n).iter().copied());
        }
    }
    Ok(CCat {
        cat,
        retained,
        context: context_vars.iter().map(|&v| (v, state.get(v))).collect(),
    })
}

impl<'a> CCat<'a> {
    pub fn source(&self) -> &'a Cat {
        self.cat
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.retained.get(n.index()).copied().unwrap_or(false)
    }

    /// Conditioning values as `(variable, value)` pairs.
    pub fn context(&self) -> &[(usize, f64)] {
        &self.context
    }

    pub fn node_count(&self) -> usize {
        self.retained.iter().filter(|&&r| r).count()
    }

    /// Depth of the retained subtree below `n` (0 for a retained leaf).
    pub fn subtree_depth(&self, n: NodeId) -> u32 {
        self.cat
            .children(n)
            .iter()
            .filter(|&&c| self.contains(c))
            .map(|&c| 1 + self.subtree_depth(c))
            .max()
            .unwrap_or(0)
    }

    /// Retained nodes in id order.
    pub fn retained_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.cat.node_ids().filter(|&n| self.contains(n))
    }
}

/// Structural distance between two views of the same tree: subtrees present
/// in only one view contribute their depth there, shared nodes sum over
/// their children.
pub fn delta_distance(a: &CCat<'_>, b: &CCat<'_>) -> Result<u32> {
    if !std::ptr::eq(a.cat, b.cat) {
        return Err(Error::Lineage("views come from different trees".into()));
    }
    Ok(delta_at(a, b, a.cat.root()))
}

fn delta_at(a: &CCat<'_>, b: &CCat<'_>, n: NodeId) -> u32 {
    match (a.contains(n), b.contains(n)) {
        (true, false) => a.subtree_depth(n),
        (false, true) => b.subtree_depth(n),
        (false, false) => 0,
        (true, true) => a.cat.children(n).iter().map(|&c| delta_at(a, b, c)).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::tests::{state, taxi_schema};
    use crate::mdp::{Schema, VariableSpec};

    #[test]
    fn empty_context_keeps_everything() {
        let mut cat = Cat::new(taxi_schema());
        cat.refine(cat.root()).unwrap();
        let s = state(cat.schema(), &[1.0, 1.0, 0.0, 0.0]);
        let c = make_ccat(&cat, &s, &[]).unwrap();
        assert_eq!(c.node_count(), cat.len());
    }

    #[test]
    fn conditioning_on_passenger_keeps_matching_half() {
        let mut cat = Cat::new(taxi_schema());
        cat.refine(cat.root()).unwrap();
        let s0 = state(cat.schema(), &[1.0, 1.0, 2.0, 0.0]);
        let c0 = make_ccat(&cat, &s0, &[3]).unwrap();
        assert_eq!(c0.node_count(), 1 + 8);
        for n in c0.retained_nodes() {
            assert_eq!(cat.region(n).interval(3).lo, 0.0);
        }
        let other = state(cat.schema(), &[4.0, 3.0, 1.0, 0.0]);
        let c0b = make_ccat(&cat, &other, &[3]).unwrap();
        assert_eq!(c0.retained, c0b.retained);
        assert_eq!(delta_distance(&c0, &c0b).unwrap(), 0);
    }

    /// Root splits p into {0},{1}; the p=0 side is refined twice more, the
    /// p=1 side once.
    #[test]
    fn delta_counts_missing_subtree_depths() {
        let schema = Schema::new(vec![
            VariableSpec::range("p", 2).unwrap(),
            VariableSpec::continuous("x", 0.0, 8.0).unwrap(),
        ])
        .unwrap();
        let mut cat = Cat::new(schema);
        let kids = cat.refine(cat.root()).unwrap();
        // bit 0 of the child code selects the p=1 half
        let p0 = kids[0];
        let p1 = kids[1];
        let a = cat.refine(p0).unwrap();
        cat.refine(a[0]).unwrap();
        cat.refine(p1).unwrap();
        let s0 = state(cat.schema(), &[0.0, 1.0]);
        let s1 = state(cat.schema(), &[1.0, 1.0]);
        let c0 = make_ccat(&cat, &s0, &[0]).unwrap();
        let c1 = make_ccat(&cat, &s1, &[0]).unwrap();
        assert_eq!(c0.subtree_depth(p0), 2);
        assert_eq!(c1.subtree_depth(p1), 1);
        assert_eq!(delta_distance(&c0, &c1).unwrap(), 3);
        assert_eq!(delta_distance(&c1, &c0).unwrap(), 3);
        assert_eq!(delta_distance(&c0, &c0).unwrap(), 0);
    }

    #[test]
    fn foreign_trees_are_rejected() {
        let a = Cat::new(taxi_schema());
        let b = Cat::new(taxi_schema());
        let s = state(a.schema(), &[1.0, 1.0, 0.0, 0.0]);
        let ca = make_ccat(&a, &s, &[3]).unwrap();
        let cb = make_ccat(&b, &s, &[3]).unwrap();
        assert!(delta_distance(&ca, &cb).is_err());
    }
}
