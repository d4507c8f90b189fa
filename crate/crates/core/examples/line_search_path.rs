//! Exact AUM and AUC along a descent direction, with the step chosen by each
//! stopping rule.

use aum_search::descent::{aum_subgradient, descent_direction};
use aum_search::synth::{binary_unbalanced, Classes};
use aum_search::{line_search, predict, Objective, Variant};
use ndarray::array;

fn main() -> aum_search::Result<()> {
    let data = binary_unbalanced(40, 2, 0.25, Classes::Overlapping { separation: 2.0 }, 1)?;
    let model = data.error_model()?;
    let w = array![-0.5, 1.0];
    let pred = predict(data.features.view(), w.view())?;
    let g = aum_subgradient(pred.as_slice().unwrap(), &model)?;
    let d = descent_direction(data.features.view(), g.view())?;

    let full = line_search(
        w.view(),
        d.view(),
        data.features.view(),
        &model,
        Variant::Quadratic,
        None,
    )?;
    println!("{} events over {} segments", full.events, full.segments.len());
    for seg in full.segments.iter().take(8) {
        println!(
            "  [{:.4}, {:?})  AUM {:.4} slope {:+.4}  AUC {:.4}",
            seg.step_lo, seg.step_hi, seg.aum_at_lo, seg.aum_slope, seg.auc_on_interval
        );
    }

    for variant in [Variant::FirstMin, Variant::Linear, Variant::Quadratic] {
        let path = line_search(w.view(), d.view(), data.features.view(), &model, variant, None)?;
        let step = path.choose_step(Objective::MinAum);
        println!(
            "{variant:?}: {} events, step {step:.4}, AUM {:.4}",
            path.events,
            path.aum(step)?
        );
    }
    let step = full.choose_step(Objective::MaxAuc);
    println!("max AUC at step {step:.4}: {:.4}", full.query(step)?.auc);
    Ok(())
}
