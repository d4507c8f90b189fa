//! Non-monotone error functions make the ROC curve loop, so AUC can go
//! above 1. The sweep tracks it exactly, including at the event steps.

use aum_search::path::{build_lines, PathState};
use aum_search::{Breakpoint, ErrorModel};
use ndarray::array;

fn main() -> aum_search::Result<()> {
    // FP rises, falls, rises for example 0; FN falls, rises, falls for example 1
    let model = ErrorModel::new(
        vec![
            Breakpoint::new(0.0, 1.0, 0.0, 0),
            Breakpoint::new(1.0, -1.0, 0.0, 0),
            Breakpoint::new(4.0, 1.0, 0.0, 0),
            Breakpoint::new(0.5, 0.0, -1.0, 1),
            Breakpoint::new(5.0, 0.0, 1.0, 1),
            Breakpoint::new(7.0, 0.0, -1.0, 1),
        ],
        2,
    )?;
    let x = array![[1.0, 0.0], [0.0, 1.0]];
    let lines = build_lines(array![0.0, 0.0].view(), array![-1.0, 1.0].view(), x.view(), &model)?;
    let mut state = PathState::init(&lines, &model)?;
    println!(
        "step 0: AUM {} slope {} AUC {}",
        state.aum(),
        state.slope(),
        state.auc_after()
    );
    while let Some(e) = state.advance()? {
        println!(
            "step {}: AUM {} slope {} -> {}  AUC {} at, {} after",
            e.step, e.aum, e.slope_before, e.slope_after, e.auc_at, e.auc_after
        );
    }
    Ok(())
}
