use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::error_model::ErrorModel;
use crate::linear::{check_finite, predict};

/// Threshold of one breakpoint as a function of step size:
/// `T(s) = intercept + slope * s`, where `intercept = v - w.x` and
/// `slope = -d.x` for the breakpoint's example `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdLine {
    pub intercept: f64,
    pub slope: f64,
    /// Index into [`ErrorModel::breakpoints`].
    pub breakpoint: usize,
}

impl ThresholdLine {
    pub fn at(&self, step: f64) -> f64 {
        self.intercept + self.slope * step
    }
}

/// One threshold line per breakpoint for predictions `X (w + s d)`.
pub fn build_lines(
    weights: ArrayView1<'_, f64>,
    direction: ArrayView1<'_, f64>,
    features: ArrayView2<'_, f64>,
    model: &ErrorModel,
) -> Result<Vec<ThresholdLine>> {
    if features.nrows() != model.n_examples() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} examples",
            features.nrows(),
            model.n_examples()
        )));
    }
    if weights.len() != direction.len() {
        return Err(Error::Dimension(format!(
            "weights have length {} but direction has length {}",
            weights.len(),
            direction.len()
        )));
    }
    check_finite("features", features.iter().copied())?;
    check_finite("weights", weights.iter().copied())?;
    check_finite("direction", direction.iter().copied())?;
    let at_zero = predict(features, weights)?;
    let rate = predict(features, direction)?;
    Ok(model
        .breakpoints()
        .iter()
        .enumerate()
        .map(|(b, bp)| ThresholdLine {
            intercept: bp.value - at_zero[bp.example],
            slope: -rate[bp.example],
            breakpoint: b,
        })
        .collect())
}
