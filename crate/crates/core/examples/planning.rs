//! Plans over a hand-made option model: A* over the tree overlaid with
//! option edges, then refinement of the path into options and gaps.

use chirp::cat::{Cat, NodeId};
use chirp::catrl::Learner;
use chirp::mdp::{Schema, VariableSpec};
use chirp::options::{AbstractOption, OptionModel, OptionSignature, Provenance};
use chirp::planner::{
    compute_option_plan_excluding, validate_plan, OptionPlan, PlanStep, PlannerConfig,
};

fn main() -> chirp::Result<()> {
    let schema = Schema::new(vec![VariableSpec::gridded("x", 0.0, 16.0, 1.0)?])?;
    let mut cat = Cat::new(schema.clone());
    let halves = cat.refine(cat.root())?;
    for h in halves {
        for q in cat.refine(h)? {
            cat.refine(q)?;
        }
    }
    let leaves: Vec<NodeId> = cat.leaves().collect();
    let mut model = OptionModel::new();
    // options hop right between neighbouring leaves
    for w in leaves.windows(2) {
        model.add(AbstractOption {
            id: 0,
            signature: OptionSignature::new(
                vec![cat.region(w[0]).clone()],
                vec![cat.region(w[1]).clone()],
            )?,
            learner: Learner::new(cat.clone(), 2),
            provenance: Provenance::default(),
            success: 1.0,
            stepmax: 20,
            needs_finetune: false,
        });
    }
    let (start, goal) = (leaves[0], leaves[7]);
    for excluded in [vec![], vec![3]] {
        let plan = compute_option_plan_excluding(
            &model,
            &cat,
            start,
            &[goal],
            PlannerConfig::default(),
            &excluded,
        )?
        .expect("reachable");
        validate_plan(&plan, &model)?;
        println!("without options {excluded:?}:");
        show(&plan, &model, &schema);
    }
    Ok(())
}

fn show(plan: &OptionPlan, model: &OptionModel, schema: &Schema) {
    println!("  cost {}", plan.cost);
    for step in &plan.steps {
        match step {
            PlanStep::Option(id) => println!(
                "  option {id}: {}",
                model.get(*id).unwrap().signature.describe(schema)
            ),
            PlanStep::Signature(sig) => println!("  learn:  {}", sig.describe(schema)),
        }
    }
}
