//! Plain-text agent checkpoints.
//!
//! ```text
//! # chirp checkpoint
//! tasks_done 2
//! rng <seed as 64 hex digits> <stream> <word position>
//! next_option 3
//! begin cat
//! <tree in its text format>
//! end cat
//! option 0
//! provenance <task> <segment start> <segment end>
//! success 0.95
//! stepmax 40
//! needs_finetune 0
//! episodes 512
//! actions 4
//! init [0,4) [0,8)
//! term [4,6) [0,2)
//! begin cat
//! <option tree>
//! end cat
//! q <node id> <value per action>
//! end option
//! ```
//!
//! Values are written in Rust's shortest round-trip form, so loading a
//! checkpoint restores the agent bit for bit.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::cat::{AbstractState, Cat, NodeId};
use crate::catrl::Learner;
use crate::error::{Error, Result};
use crate::options::{AbstractOption, OptionModel, OptionSignature, Provenance};
use crate::Rng;

use super::{ChirpAgent, ChirpConfig};

fn write_rng(out: &mut String, rng: &Rng) {
    let seed: String = rng.get_seed().iter().map(|b| format!("{b:02x}")).collect();
    let _ = writeln!(
        out,
        "rng {seed} {} {}",
        rng.get_stream(),
        rng.get_word_pos()
    );
}

fn read_rng(rest: &str, line: usize) -> Result<Rng> {
    use rand::SeedableRng;
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let bad = || Error::parse(line, "malformed rng record");
    if parts.len() != 3 || parts[0].len() != 64 {
        return Err(bad());
    }
    let mut seed = [0u8; 32];
    for (i, b) in seed.iter_mut().enumerate() {
        *b = u8::from_str_radix(&parts[0][2 * i..2 * i + 2], 16).map_err(|_| bad())?;
    }
    let mut rng = Rng::from_seed(seed);
    rng.set_stream(parts[1].parse().map_err(|_| bad())?);
    rng.set_word_pos(parts[2].parse().map_err(|_| bad())?);
    Ok(rng)
}

fn write_option(out: &mut String, o: &AbstractOption) {
    let _ = writeln!(out, "option {}", o.id);
    let _ = writeln!(
        out,
        "provenance {} {} {}",
        o.provenance.task, o.provenance.segment.0, o.provenance.segment.1
    );
    let _ = writeln!(out, "success {}", o.success);
    let _ = writeln!(out, "stepmax {}", o.stepmax);
    let _ = writeln!(out, "needs_finetune {}", o.needs_finetune as u8);
    let _ = writeln!(out, "episodes {}", o.learner.episodes);
    let _ = writeln!(out, "actions {}", o.learner.q.n_actions());
    for r in &o.signature.initiation {
        let _ = writeln!(out, "init {r}");
    }
    for r in &o.signature.termination {
        let _ = writeln!(out, "term {r}");
    }
    out.push_str("begin cat\n");
    out.push_str(&o.learner.cat.to_text());
    out.push_str("end cat\n");
    for n in o.learner.q.live_nodes() {
        let row: Vec<String> = o.learner.q.row(n).iter().map(f64::to_string).collect();
        let _ = writeln!(out, "q {} {}", n.0, row.join(" "));
    }
    out.push_str("end option\n");
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty, non-comment line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self
            .next()
            .ok_or_else(|| Error::Invalid(format!("checkpoint ends before `{key}`")))?;
        let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
        if head != key {
            return Err(Error::parse(n, format!("expected `{key}`, found `{head}`")));
        }
        Ok((n, rest.trim()))
    }

    fn value<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (n, rest) = self.expect(key)?;
        rest.parse()
            .map_err(|_| Error::parse(n, format!("bad value for `{key}`")))
    }

    fn cat(&mut self) -> Result<Cat> {
        self.expect("begin")?;
        let mut text = String::new();
        loop {
            let (_, line) = self
                .next()
                .ok_or_else(|| Error::Invalid("unterminated tree block".into()))?;
            if line == "end cat" {
                break;
            }
            text.push_str(line);
            text.push('\n');
        }
        Cat::from_text(&text)
    }
}

fn read_option(lines: &mut Lines<'_>, id: usize) -> Result<AbstractOption> {
    let (n, prov) = lines.expect("provenance")?;
    let p: Vec<usize> = prov
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(n, "bad provenance")))
        .collect::<Result<_>>()?;
    if p.len() != 3 {
        return Err(Error::parse(n, "provenance needs three numbers"));
    }
    let success: f64 = lines.value("success")?;
    let stepmax: usize = lines.value("stepmax")?;
    let needs: u8 = lines.value("needs_finetune")?;
    let episodes: u64 = lines.value("episodes")?;
    let actions: usize = lines.value("actions")?;
    let mut init = Vec::new();
    let mut term = Vec::new();
    let mut cat = None;
    while cat.is_none() {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::Invalid("option ends early".into()))?;
        let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
        match head {
            "init" => init
                .push(AbstractState::from_str(rest).map_err(|e| Error::parse(n, e.to_string()))?),
            "term" => term
                .push(AbstractState::from_str(rest).map_err(|e| Error::parse(n, e.to_string()))?),
            "begin" => {
                let mut text = String::new();
                loop {
                    let (_, l) = lines
                        .next()
                        .ok_or_else(|| Error::Invalid("unterminated tree block".into()))?;
                    if l == "end cat" {
                        break;
                    }
                    text.push_str(l);
                    text.push('\n');
                }
                cat = Some(Cat::from_text(&text)?);
            }
            _ => return Err(Error::parse(n, format!("unexpected `{head}` in option"))),
        }
    }
    let mut learner = Learner::new(cat.expect("loop exits with a tree"), actions);
    learner.episodes = episodes;
    loop {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::Invalid("option ends early".into()))?;
        if line == "end option" {
            break;
        }
        let rest = line
            .strip_prefix("q ")
            .ok_or_else(|| Error::parse(n, "expected a q row"))?;
        let mut parts = rest.split_whitespace();
        let node: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(n, "bad node id"))?;
        let node = NodeId(node);
        if !learner.q.is_live(node) {
            return Err(Error::parse(n, "q row for a node that is not a leaf"));
        }
        let values: Vec<f64> = parts
            .map(|t| t.parse().map_err(|_| Error::parse(n, "bad q value")))
            .collect::<Result<_>>()?;
        if values.len() != actions {
            return Err(Error::parse(
                n,
                "q row length differs from the action count",
            ));
        }
        for (a, v) in values.into_iter().enumerate() {
            learner.q.set(node, a, v);
        }
    }
    Ok(AbstractOption {
        id,
        signature: OptionSignature::new(init, term)?,
        learner,
        provenance: Provenance {
            task: p[0],
            segment: (p[1], p[2]),
        },
        success,
        stepmax,
        needs_finetune: needs != 0,
    })
}

impl ChirpAgent {
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::from("# chirp checkpoint\n");
        let _ = writeln!(out, "tasks_done {}", self.tasks_done);
        write_rng(&mut out, &self.rng);
        let _ = writeln!(out, "next_option {}", self.model.next_id());
        out.push_str("begin cat\n");
        out.push_str(&self.cat.to_text());
        out.push_str("end cat\n");
        for o in self.model.options() {
            write_option(&mut out, o);
        }
        out
    }

    /// Restores an agent written by [`ChirpAgent::to_checkpoint`].
    pub fn from_checkpoint(text: &str, config: ChirpConfig) -> Result<ChirpAgent> {
        let mut lines = Lines {
            inner: text.lines().enumerate(),
        };
        let tasks_done: usize = lines.value("tasks_done")?;
        let (n, rng) = lines.expect("rng")?;
        let rng = read_rng(rng, n)?;
        let next_option: usize = lines.value("next_option")?;
        let cat = lines.cat()?;
        let mut model = OptionModel::new();
        while let Some((n, line)) = lines.next() {
            let id = line
                .strip_prefix("option ")
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| Error::parse(n, "expected `option <id>`"))?;
            let option = read_option(&mut lines, id)?;
            if !option.learner.cat.same_lineage(&cat) {
                return Err(Error::Lineage(format!("option {id} has a foreign tree")));
            }
            model.insert_raw(option);
        }
        model.set_next_id(next_option);
        Ok(ChirpAgent {
            cat,
            model,
            rng,
            tasks_done,
            config,
            suspended: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catrl::Hyper;
    use crate::domains::{make_domain, sample_stream, DomainKind, Simulator, SizeConfig};
    use rand::RngCore;

    fn hyper() -> Hyper {
        Hyper {
            epsilon_decay: 0.99,
            stepmax: 60,
            e_max: 300,
            budget: 100_000,
            ..Hyper::default()
        }
    }

    #[test]
    fn rng_cursor_round_trips() {
        use rand::SeedableRng;
        let mut rng = Rng::seed_from_u64(77);
        rng.set_stream(5);
        rng.next_u64();
        let mut out = String::new();
        write_rng(&mut out, &rng);
        let mut back = read_rng(out.trim().strip_prefix("rng ").unwrap(), 1).unwrap();
        assert_eq!(back.next_u64(), rng.next_u64());
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let d = make_domain(
            DomainKind::Maze,
            SizeConfig::Custom {
                width: 6,
                height: 2,
            },
        )
        .unwrap();
        let stream = sample_stream(&d, 21, 4, 100_000).unwrap();
        let fresh = || ChirpAgent::new(Cat::new(d.schema().clone()), ChirpConfig::new(hyper()), 9);

        let mut whole = fresh();
        let all: Vec<(bool, u64)> = whole
            .solve_stream(&d, &stream, |_, _| Ok(()))
            .unwrap()
            .iter()
            .map(|r| (r.solved, r.timesteps))
            .collect();

        let mut first = fresh();
        let mut saved = None;
        first
            .solve_stream(&d, &stream, |a, _| {
                if a.tasks_done == 2 {
                    saved = Some(a.to_checkpoint());
                }
                Ok(())
            })
            .unwrap();
        let text = saved.unwrap();
        let mut resumed = ChirpAgent::from_checkpoint(&text, ChirpConfig::new(hyper())).unwrap();
        assert_eq!(resumed.to_checkpoint(), text);
        let rest: Vec<(bool, u64)> = resumed
            .solve_stream(&d, &stream, |_, _| Ok(()))
            .unwrap()
            .iter()
            .map(|r| (r.solved, r.timesteps))
            .collect();
        assert_eq!(rest, all[2..]);
        assert_eq!(resumed.to_checkpoint(), whole.to_checkpoint());
    }

    #[test]
    fn corrupt_checkpoints_rejected() {
        let d = make_domain(
            DomainKind::Maze,
            SizeConfig::Custom {
                width: 4,
                height: 1,
            },
        )
        .unwrap();
        let agent = ChirpAgent::new(Cat::new(d.schema().clone()), ChirpConfig::new(hyper()), 1);
        let text = agent.to_checkpoint();
        assert!(ChirpAgent::from_checkpoint(
            &text.replace("tasks_done", "tasks"),
            ChirpConfig::new(hyper())
        )
        .is_err());
        assert!(ChirpAgent::from_checkpoint(
            &text.replace("end cat", ""),
            ChirpConfig::new(hyper())
        )
        .is_err());
        assert!(ChirpAgent::from_checkpoint(
            &format!("{text}option 0\nprovenance 1\n"),
            ChirpConfig::new(hyper())
        )
        .is_err());
    }
}
