use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Predictions `X w` of a linear model.
pub fn predict(features: ArrayView2<'_, f64>, weights: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if features.ncols() != weights.len() {
        return Err(Error::Dimension(format!(
            "features have {} columns but weights have length {}",
            features.ncols(),
            weights.len()
        )));
    }
    Ok(features.dot(&weights))
}

/// Predictions at step size `step` along `direction`: `X (w + step d)`.
pub fn predict_at(
    features: ArrayView2<'_, f64>,
    weights: ArrayView1<'_, f64>,
    direction: ArrayView1<'_, f64>,
    step: f64,
) -> Result<Array1<f64>> {
    if weights.len() != direction.len() {
        return Err(Error::Dimension(format!(
            "weights have length {} but direction has length {}",
            weights.len(),
            direction.len()
        )));
    }
    let moved = &weights + &(&direction * step);
    predict(features, moved.view())
}

pub(crate) fn check_finite(name: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} contains non-finite entries")))
    }
}
