//! Seeded synthetic instances.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::error_model::{Breakpoint, ErrorModel};

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryInstance {
    pub features: Array2<f64>,
    /// 1 or -1 per example.
    pub labels: Vec<i8>,
}

impl BinaryInstance {
    pub fn error_model(&self) -> Result<ErrorModel> {
        ErrorModel::binary(&self.labels)
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChangepointInstance {
    pub features: Array2<f64>,
    pub model: ErrorModel,
}

/// Class layout for [`binary_unbalanced`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classes {
    /// Feature 0 is shifted by `+separation / 2` for positives and
    /// `-separation / 2` for negatives.
    Overlapping { separation: f64 },
    /// Feature 0 is `y * (margin + |z|)`, so the classes are separated by
    /// at least `2 * margin` along it.
    Separable { margin: f64 },
}

fn check_sizes(n: usize, min_n: usize, p: usize) -> Result<()> {
    if n < min_n {
        return Err(Error::InvalidArgument(format!("n must be >= {min_n}, got {n}")));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("p must be >= 1".into()));
    }
    Ok(())
}

fn gaussian_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || StandardNormal.sample(rng))
}

/// Gaussian features for `n` examples of which `round(n * imbalance)`
/// (at least one, at most `n - 1`) are positive, placed at random rows.
pub fn binary_unbalanced(n: usize, p: usize, imbalance: f64, classes: Classes, seed: u64) -> Result<BinaryInstance> {
    check_sizes(n, 4, p)?;
    if !(imbalance > 0.0 && imbalance < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "imbalance must be in (0, 1), got {imbalance}"
        )));
    }
    let shift = match classes {
        Classes::Overlapping { separation } => separation,
        Classes::Separable { margin } => margin,
    };
    if !shift.is_finite() {
        return Err(Error::InvalidArgument(format!("class shift {shift} must be finite")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_pos = ((n as f64 * imbalance).round() as usize).clamp(1, n - 1);
    let mut labels: Vec<i8> = (0..n).map(|i| if i < n_pos { 1 } else { -1 }).collect();
    labels.shuffle(&mut rng);
    let mut features = gaussian_matrix(n, p, &mut rng);
    for (i, &y) in labels.iter().enumerate() {
        let y = f64::from(y);
        let x0 = &mut features[[i, 0]];
        *x0 = match classes {
            Classes::Overlapping { separation } => *x0 + y * separation / 2.0,
            Classes::Separable { margin } => y * (margin + x0.abs()),
        };
    }
    Ok(BinaryInstance { features, labels })
}

/// Changepoint-style error functions with loops.
///
/// Each example has a centre `c = w* . x` for a hidden gaussian `w*`.
/// Example 0 has FP rising at `c`, falling at `c + 1` and rising again at
/// `c + 2`; example 1 has FN falling, rising and falling at the same
/// offsets. Both loops have equal spacing, so at predictions where example
/// 1's thresholds sit between 0 and 1 below example 0's, the ROC curve goes
/// round a loop twice and AUC exceeds 1. Other examples are monotone: FN
/// drops at `c - 1` and FP rises at `c + 1`. Rates are normalized over all
/// examples.
pub fn changepoint_nonmono(n: usize, p: usize, seed: u64) -> Result<ChangepointInstance> {
    check_sizes(n, 2, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = gaussian_matrix(n, p, &mut rng);
    let hidden: Array1<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let centres = features.dot(&hidden);
    let mut breakpoints = Vec::with_capacity(3 * n);
    for (i, &c) in centres.iter().enumerate() {
        match i {
            0 => breakpoints.extend([
                Breakpoint::new(c, 1.0, 0.0, i),
                Breakpoint::new(c + 1.0, -1.0, 0.0, i),
                Breakpoint::new(c + 2.0, 1.0, 0.0, i),
            ]),
            1 => breakpoints.extend([
                Breakpoint::new(c, 0.0, -1.0, i),
                Breakpoint::new(c + 1.0, 0.0, 1.0, i),
                Breakpoint::new(c + 2.0, 0.0, -1.0, i),
            ]),
            _ => breakpoints.extend([
                Breakpoint::new(c - 1.0, 0.0, -1.0, i),
                Breakpoint::new(c + 1.0, 1.0, 0.0, i),
            ]),
        }
    }
    let model = ErrorModel::raw(breakpoints, n)?.normalize()?;
    Ok(ChangepointInstance { features, model })
}
