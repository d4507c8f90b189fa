//! ROC curves, AUC and AUM at fixed predictions, computed from scratch.
//!
//! Adding a constant `c` to every prediction sweeps out the ROC curve. A
//! breakpoint `b` of example `i` is crossed when `c` passes its threshold
//! `v_b - yhat_i`, so sorting thresholds and accumulating deltas yields the
//! error rates on every interval between consecutive thresholds.
//!
//! These routines are deliberately simple `O(B log B)` recomputations. They
//! serve as the reference for the step-size sweep in [`crate::path`] and as
//! the grid-search baseline.

use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::error_model::ErrorModel;
use crate::linear::{check_finite, predict_at};

/// Error rates on the intervals between sorted, distinct thresholds.
///
/// With `G` distinct thresholds there are `G + 1` intervals. Interval `k`
/// lies just before `thresholds[k]` (interval `G` is after the last one), so
/// `fpr[0] = 0`, `fnr[0] = 1`, `fpr[G] = 1` and `fnr[G] = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    pub thresholds: Vec<f64>,
    pub fpr: Vec<f64>,
    pub fnr: Vec<f64>,
}

impl RocCurve {
    pub fn tpr(&self) -> impl Iterator<Item = f64> + '_ {
        self.fnr.iter().map(|f| 1.0 - f)
    }

    /// `min(FPR, FNR)` on the interior intervals `1..G`.
    pub fn min_vec(&self) -> Vec<f64> {
        (1..self.thresholds.len())
            .map(|k| self.fpr[k].min(self.fnr[k]))
            .collect()
    }

    /// ROC points `(FPR, TPR)` in order of increasing constant.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.fpr.iter().copied().zip(self.tpr()).collect()
    }

    /// Trapezoidal area under the ROC polyline. Non-monotone error functions
    /// make the polyline loop, so the result may leave [0, 1].
    pub fn auc(&self) -> f64 {
        self.fpr
            .windows(2)
            .zip(self.fnr.windows(2))
            .map(|(fp, fn_)| (fp[1] - fp[0]) * ((1.0 - fn_[1]) + (1.0 - fn_[0])) / 2.0)
            .sum()
    }

    /// Area under `min(FPR, FNR)` as a function of the added constant.
    pub fn aum(&self) -> f64 {
        (1..self.thresholds.len())
            .map(|k| (self.thresholds[k] - self.thresholds[k - 1]) * self.fpr[k].min(self.fnr[k]))
            .sum()
    }
}

/// Sorted thresholds with the breakpoint deltas that jump there.
pub(crate) fn sorted_thresholds(predictions: &[f64], model: &ErrorModel) -> Vec<(f64, f64, f64)> {
    let mut t: Vec<(f64, f64, f64)> = model
        .breakpoints()
        .iter()
        .map(|b| (b.value - predictions[b.example], b.delta_fp, b.delta_fn))
        .collect();
    t.sort_by(|a, b| a.0.total_cmp(&b.0));
    t
}

/// ROC curve at `predictions`; breakpoints with exactly equal thresholds form
/// a single ROC step.
pub fn roc(predictions: &[f64], model: &ErrorModel) -> Result<RocCurve> {
    roc_with_tolerance(predictions, model, 0.0)
}

/// Like [`roc`], but consecutive sorted thresholds closer than `tolerance`
/// are merged into one step. Used to evaluate the curve exactly at a step
/// size where threshold lines meet and float rounding separates them.
pub fn roc_with_tolerance(predictions: &[f64], model: &ErrorModel, tolerance: f64) -> Result<RocCurve> {
    if predictions.len() != model.n_examples() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} examples",
            predictions.len(),
            model.n_examples()
        )));
    }
    check_finite("predictions", predictions.iter().copied())?;
    let sorted = sorted_thresholds(predictions, model);
    let mut thresholds = Vec::with_capacity(sorted.len());
    let mut fpr = vec![0.0];
    let mut fnr = vec![-model.total_fn()];
    let mut last = f64::NEG_INFINITY;
    for (t, dfp, dfn) in sorted {
        if t - last <= tolerance {
            *fpr.last_mut().unwrap() += dfp;
            *fnr.last_mut().unwrap() += dfn;
        } else {
            thresholds.push(t);
            fpr.push(fpr.last().unwrap() + dfp);
            fnr.push(fnr.last().unwrap() + dfn);
        }
        last = t;
    }
    Ok(RocCurve { thresholds, fpr, fnr })
}

pub fn auc(curve: &RocCurve) -> f64 {
    curve.auc()
}

pub fn aum(predictions: &[f64], model: &ErrorModel) -> Result<f64> {
    Ok(roc(predictions, model)?.aum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub step: f64,
    pub aum: f64,
    pub auc: f64,
}

/// Evaluates AUM and AUC from scratch at predictions `X (w + s d)` for every
/// step size `s` in `steps`.
pub fn grid_evaluate(
    weights: ArrayView1<'_, f64>,
    direction: ArrayView1<'_, f64>,
    features: ArrayView2<'_, f64>,
    model: &ErrorModel,
    steps: &[f64],
) -> Result<Vec<GridPoint>> {
    if let Some(s) = steps.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size {s} must be finite and >= 0")));
    }
    if features.nrows() != model.n_examples() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} examples",
            features.nrows(),
            model.n_examples()
        )));
    }
    steps
        .iter()
        .map(|&step| {
            let pred = predict_at(features, weights, direction, step)?;
            let curve = roc(pred.as_slice().expect("contiguous"), model)?;
            Ok(GridPoint {
                step,
                aum: curve.aum(),
                auc: curve.auc(),
            })
        })
        .collect()
}
