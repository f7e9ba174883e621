//! Builds a small abstraction tree over a taxi-like state space, refines it,
//! looks states up and compares nodes with both distance measures.

use chirp::cat::{delta_distance, make_ccat, sigma_distance, Cat, SigmaWeights};
use chirp::mdp::{Schema, VariableSpec};

fn main() -> chirp::Result<()> {
    let schema = Schema::new(vec![
        VariableSpec::gridded("x", 0.0, 8.0, 1.0)?,
        VariableSpec::gridded("y", 0.0, 8.0, 1.0)?,
        VariableSpec::range("passenger", 2)?,
    ])?;
    let mut cat = Cat::new(schema.clone());
    let kids = cat.refine(cat.root())?;
    cat.refine(kids[0])?;
    println!(
        "{} nodes, {} leaves, depth {}",
        cat.len(),
        cat.leaf_count(),
        cat.depth_max()
    );

    let waiting = schema.state(vec![1.5, 0.5, 0.0])?;
    let riding = schema.state(vec![1.5, 0.5, 1.0])?;
    for s in [&waiting, &riding] {
        let leaf = cat.leaf_of(s);
        println!(
            "{:?} -> leaf #{} {}",
            s.values(),
            leaf.0,
            cat.region(leaf).describe(&schema)
        );
    }

    let a = make_ccat(&cat, &waiting, &[2])?;
    let b = make_ccat(&cat, &riding, &[2])?;
    println!(
        "context-specific distance across the passenger flip: {}",
        delta_distance(&a, &b)?
    );

    let (la, lb) = (cat.leaf_of(&waiting), cat.leaf_of(&riding));
    println!(
        "context-independent distance between the two leaves: {}",
        sigma_distance(&cat, la, lb, SigmaWeights::default())?
    );

    print!("{}", cat.to_text());
    Ok(())
}
