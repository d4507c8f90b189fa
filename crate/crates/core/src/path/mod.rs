//! Exact line search over the step size.
//!
//! For predictions `X (w + s d)` every breakpoint threshold is a line in `s`
//! (see [`ThresholdLine`]). Between step sizes where two lines cross, the
//! threshold order is fixed, AUM is linear and AUC is constant. The sweep in
//! [`PathState`] visits the crossings in order, updating AUM slope and AUC in
//! constant time per crossing, and [`run`] collects the result as a
//! [`StepPath`].

mod lines;
mod queue;
mod state;
mod step_path;

use ndarray::{ArrayView1, ArrayView2};

pub use lines::{build_lines, ThresholdLine};
pub use queue::{IntervalColumn, IntervalGroup, IntervalQueue, GROUPING_TOLERANCE};
pub use state::{EventOutcome, IntersectionEvent, PathState};
pub use step_path::{Objective, PathValue, Segment, StepPath};

use crate::error::{Error, Result};
use crate::error_model::ErrorModel;

/// How far along the step-size axis to sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Stop at the first step size where AUM stops decreasing.
    FirstMin,
    /// Process at most as many event steps as there are breakpoints.
    Linear,
    /// Process every event.
    Quadratic,
    /// Process every event; meant for picking the step of largest AUC.
    MaxAuc,
}

/// Default event budget for `b` breakpoints: every pair crossing once, plus
/// slack.
pub fn default_max_events(b: usize) -> usize {
    b * b.saturating_sub(1) / 2 + b
}

/// Sweeps a freshly initialized state until `variant` says stop or
/// `max_events` event steps have been processed.
pub fn run(mut state: PathState, variant: Variant, max_events: Option<usize>) -> Result<StepPath> {
    if state.steps_processed() != 0 {
        return Err(Error::InvalidArgument(
            "path search needs a state that has not been advanced".into(),
        ));
    }
    let b = state.n_breakpoints();
    let budget = max_events.unwrap_or_else(|| default_max_events(b));
    let limit = match variant {
        Variant::Linear => budget.min(b),
        _ => budget,
    };
    let mut segments = vec![Segment {
        step_lo: 0.0,
        step_hi: None,
        aum_at_lo: state.aum(),
        aum_slope: state.slope(),
        auc_at_lo_event: state.auc_at_start(),
        auc_on_interval: state.auc_after(),
    }];
    let mut events = 0;
    loop {
        if variant == Variant::FirstMin && state.slope() >= 0.0 {
            break;
        }
        if events >= limit {
            break;
        }
        let Some(out) = state.advance()? else { break };
        segments.last_mut().expect("non-empty").step_hi = Some(out.step);
        segments.push(Segment {
            step_lo: out.step,
            step_hi: None,
            aum_at_lo: out.aum,
            aum_slope: out.slope_after,
            auc_at_lo_event: out.auc_at,
            auc_on_interval: out.auc_after,
        });
        events += 1;
    }
    let explored_to = state.peek_next_step();
    let last = segments.last_mut().expect("non-empty");
    last.step_hi = explored_to;
    if explored_to.is_none() {
        // AUM is nonnegative, so past the last event it cannot decrease; a
        // negative value here is accumulated rounding.
        last.aum_slope = last.aum_slope.max(0.0);
    }
    Ok(StepPath {
        segments,
        explored_to,
        truncated: explored_to.is_some() && events >= budget,
        events,
    })
}

/// Builds the threshold lines for `X (w + s d)` and runs the sweep.
pub fn line_search(
    weights: ArrayView1<'_, f64>,
    direction: ArrayView1<'_, f64>,
    features: ArrayView2<'_, f64>,
    model: &ErrorModel,
    variant: Variant,
    max_events: Option<usize>,
) -> Result<StepPath> {
    let lines = build_lines(weights, direction, features, model)?;
    run(PathState::init(&lines, model)?, variant, max_events)
}
