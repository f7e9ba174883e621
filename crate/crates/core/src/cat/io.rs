//! Plain-text tree format.
//!
//! ```text
//! # cat
//! min_resolution 1
//! var x continuous 0 5
//! var p discrete 0 1
//! node 0 - [0,5) [0,2)
//! node 1 0 [0,2.5) [0,1)
//! ```
//!
//! `var` lines declare the schema in order. Each `node` line gives the id,
//! the parent id (`-` for the root) and one interval per variable; discrete
//! intervals are in index coordinates. Nodes are listed in id order and the
//! children of one parent appear together, exactly as produced by
//! [`Cat::to_text`]. Loading replays the splits and checks every region.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{AbstractState, Cat, CatConfig, NodeId};
use crate::error::{Error, Result};
use crate::mdp::{Schema, VariableSpec};

impl Cat {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# cat\n");
        let _ = writeln!(out, "min_resolution {}", self.config.min_resolution);
        for v in self.schema.vars() {
            let _ = writeln!(out, "var {v}");
        }
        for n in self.node_ids() {
            let parent = match self.parent(n) {
                Some(p) => p.0.to_string(),
                None => "-".into(),
            };
            let _ = writeln!(out, "node {} {} {}", n.0, parent, self.region(n));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Cat> {
        let mut config = CatConfig::default();
        let mut vars = Vec::new();
        let mut nodes: Vec<(usize, u32, Option<u32>, AbstractState)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            match head {
                "min_resolution" => {
                    config.min_resolution = rest
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad min_resolution"))?;
                }
                "var" => vars.push(
                    VariableSpec::from_str(rest)
                        .map_err(|e| Error::parse(line_no, e.to_string()))?,
                ),
                "node" => {
                    let mut parts = rest.splitn(3, ' ');
                    let id = parts
                        .next()
                        .and_then(|t| t.parse::<u32>().ok())
                        .ok_or_else(|| Error::parse(line_no, "bad node id"))?;
                    let parent = match parts.next() {
                        Some("-") => None,
                        Some(t) => Some(
                            t.parse::<u32>()
                                .map_err(|_| Error::parse(line_no, "bad parent id"))?,
                        ),
                        None => return Err(Error::parse(line_no, "missing parent id")),
                    };
                    let region = AbstractState::from_str(parts.next().unwrap_or(""))
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                    nodes.push((line_no, id, parent, region));
                }
                other => return Err(Error::parse(line_no, format!("unknown record `{other}`"))),
            }
        }
        let schema = Schema::new(vars)?;
        let mut cat = Cat::with_config(schema, config);
        let Some((line_no, 0, None, root)) = nodes.first() else {
            return Err(Error::parse(0, "first node must be root `node 0 -`"));
        };
        if *root != *cat.region(cat.root()) {
            return Err(Error::parse(
                *line_no,
                "root region does not cover the schema",
            ));
        }
        for (line_no, id, parent, region) in nodes.iter().skip(1) {
            let Some(p) = parent else {
                return Err(Error::parse(*line_no, "second root"));
            };
            let p = NodeId(*p);
            if !cat.contains_node(p) {
                return Err(Error::parse(*line_no, "parent listed after child"));
            }
            if cat.is_leaf(p) {
                cat.refine(p)
                    .map_err(|e| Error::parse(*line_no, e.to_string()))?;
            }
            if cat.find(region) != Some(NodeId(*id)) || cat.parent(NodeId(*id)) != Some(p) {
                return Err(Error::parse(
                    *line_no,
                    format!("node {id} does not match the split of its parent"),
                ));
            }
        }
        if cat.len() != nodes.len() {
            return Err(Error::parse(0, "node list incomplete"));
        }
        Ok(cat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::tests::taxi_schema;

    #[test]
    fn text_round_trip() {
        let mut cat = Cat::new(taxi_schema());
        let kids = cat.refine(cat.root()).unwrap();
        cat.refine(kids[5]).unwrap();
        let text = cat.to_text();
        let back = Cat::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.leaf_count(), cat.leaf_count());
    }

    #[test]
    fn rejects_tampered_region() {
        let mut cat = Cat::new(taxi_schema());
        cat.refine(cat.root()).unwrap();
        let text = cat.to_text().replacen("[0,2.5)", "[0,2)", 1);
        assert!(matches!(Cat::from_text(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn rejects_unknown_records() {
        assert!(Cat::from_text("bogus 1\n").is_err());
        assert!(Cat::from_text("var x continuous 0 5\n").is_err());
    }
}
