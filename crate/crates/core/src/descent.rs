//! Full-batch gradient descent on AUM for a linear model, with the step size
//! chosen by the exact line search in [`crate::path`] or by a fixed grid.

use std::io::Write;
use std::time::Instant;

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::error_model::ErrorModel;
use crate::linear::{check_finite, predict};
use crate::path::{line_search, Objective, Variant};
use crate::roc::{grid_evaluate, roc};

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub weights: Array1<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    Zeros,
    /// Independent normal draws with this standard deviation.
    Gaussian(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrainVariant {
    FirstMin,
    Linear,
    Quadratic,
    /// Step of largest validation AUC along the subtrain direction.
    MaxAucValidation,
    /// Smallest subtrain AUM over [`TrainConfig::grid`].
    Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub variant: TrainVariant,
    /// Stop once an iteration decreases subtrain AUM by less than this.
    pub aum_tolerance: f64,
    pub max_steps: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub init: Init,
    /// Event budget per line search; `None` uses the default.
    pub max_events: Option<usize>,
    /// Record wall-clock time per step (makes logs non-reproducible).
    pub record_time: bool,
}

/// 13 step sizes `10^-6, 10^-5, ..., 10^6`.
pub fn default_grid() -> Vec<f64> {
    (-6..=6).map(|e| 10f64.powi(e)).collect()
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            variant: TrainVariant::FirstMin,
            aum_tolerance: 1e-3,
            max_steps: 1000,
            grid: default_grid(),
            seed: 1,
            init: Init::Gaussian(1.0),
            max_events: None,
            record_time: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.aum_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "aum tolerance must be > 0, got {}",
                self.aum_tolerance
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max steps must be >= 1".into()));
        }
        if let Init::Gaussian(scale) = self.init {
            if !(scale >= 0.0 && scale.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "init scale {scale} must be finite and >= 0"
                )));
            }
        }
        if self.variant == TrainVariant::Grid {
            if self.grid.is_empty() {
                return Err(Error::InvalidArgument(
                    "grid variant needs at least one step size".into(),
                ));
            }
            if let Some(s) = self.grid.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
                return Err(Error::InvalidArgument(format!("grid step {s} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// One row of the training log. Row 0 describes the initial model.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainStep {
    pub step: usize,
    pub step_size: f64,
    pub aum_subtrain: f64,
    pub auc_subtrain: f64,
    pub auc_validation: Option<f64>,
    /// Event steps processed by the line search (0 for the grid variant).
    pub events_explored: usize,
    pub elapsed_ns: Option<u128>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub steps: Vec<TrainStep>,
    /// The first descent direction was zero, so no step was taken.
    pub stationary_start: bool,
}

impl TrainLog {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record([
            "step",
            "step_size",
            "aum_subtrain",
            "auc_subtrain",
            "auc_validation",
            "events_explored",
            "elapsed_ns",
        ])?;
        for s in &self.steps {
            out.write_record([
                s.step.to_string(),
                s.step_size.to_string(),
                s.aum_subtrain.to_string(),
                s.auc_subtrain.to_string(),
                s.auc_validation.map(|a| a.to_string()).unwrap_or_default(),
                s.events_explored.to_string(),
                s.elapsed_ns.map(|t| t.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Largest validation AUC over all rows, with its row.
    pub fn max_validation_auc(&self) -> Option<(usize, f64)> {
        self.steps
            .iter()
            .filter_map(|s| s.auc_validation.map(|a| (s.step, a)))
            .fold(None, |best, (k, a)| match best {
                Some((_, b)) if b >= a => best,
                _ => Some((k, a)),
            })
    }

    /// Mean line-search events per gradient step.
    pub fn mean_events_per_step(&self) -> f64 {
        let steps = self.steps.len().saturating_sub(1);
        if steps == 0 {
            return 0.0;
        }
        self.steps.iter().map(|s| s.events_explored).sum::<usize>() as f64 / steps as f64
    }

    /// Number of gradient steps taken.
    pub fn gradient_steps(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Gradient of AUM with respect to the predictions.
///
/// Breakpoint thresholds `v - yhat` are sorted (ties by breakpoint index);
/// the threshold at sorted position `j` bounds the intervals with min error
/// `M[j]` on its left and `M[j + 1]` on its right, where the outermost
/// intervals count as zero. Raising `yhat_i` moves example `i`'s thresholds
/// left, so `g_i` collects `M[j + 1] - M[j]` over them. At tied predictions
/// this is one subgradient.
pub fn aum_subgradient(predictions: &[f64], model: &ErrorModel) -> Result<Array1<f64>> {
    if predictions.len() != model.n_examples() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} examples",
            predictions.len(),
            model.n_examples()
        )));
    }
    check_finite("predictions", predictions.iter().copied())?;
    let bps = model.breakpoints();
    let mut order: Vec<(f64, usize)> = bps
        .iter()
        .enumerate()
        .map(|(b, bp)| (bp.value - predictions[bp.example], b))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = order.len();
    let mut min = vec![0.0; n + 1];
    let mut fp = 0.0;
    let mut fn_ = -model.total_fn();
    for j in 0..n {
        let bp = &bps[order[j].1];
        fp += bp.delta_fp;
        fn_ += bp.delta_fn;
        if j + 1 < n {
            min[j + 1] = f64::min(fp, fn_);
        }
    }
    let mut g = Array1::zeros(model.n_examples());
    for (j, &(_, b)) in order.iter().enumerate() {
        g[bps[b].example] += min[j + 1] - min[j];
    }
    Ok(g)
}

/// Steepest descent direction `-X^T g` in weight space.
pub fn descent_direction(features: ArrayView2<'_, f64>, gradient: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if features.nrows() != gradient.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for a gradient of length {}",
            features.nrows(),
            gradient.len()
        )));
    }
    Ok(-features.t().dot(&gradient))
}

pub fn initial_weights(p: usize, init: Init, seed: u64) -> Array1<f64> {
    match init {
        Init::Zeros => Array1::zeros(p),
        Init::Gaussian(scale) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, scale).expect("scale validated");
            Array1::from_iter((0..p).map(|_| normal.sample(&mut rng)))
        }
    }
}

/// Examples and error functions of one data split.
#[derive(Clone, Copy, Debug)]
pub struct Split<'a> {
    pub features: ArrayView2<'a, f64>,
    pub model: &'a ErrorModel,
}

impl Split<'_> {
    fn check(&self, name: &str, p: usize) -> Result<()> {
        if self.features.nrows() != self.model.n_examples() {
            return Err(Error::Dimension(format!(
                "{name}: {} feature rows for {} examples",
                self.features.nrows(),
                self.model.n_examples()
            )));
        }
        if self.features.ncols() != p {
            return Err(Error::Dimension(format!(
                "{name}: {} feature columns, expected {p}",
                self.features.ncols()
            )));
        }
        check_finite(name, self.features.iter().copied())
    }

    fn evaluate(&self, weights: ArrayView1<'_, f64>) -> Result<(f64, f64)> {
        let pred = predict(self.features, weights)?;
        let curve = roc(pred.as_slice().expect("contiguous"), self.model)?;
        Ok((curve.aum(), curve.auc()))
    }
}

/// Trains from the initial weights given by `config.init` and `config.seed`.
pub fn train<'a>(
    subtrain: Split<'a>,
    validation: Option<Split<'a>>,
    config: &TrainConfig,
) -> Result<(Model, TrainLog)> {
    let weights = initial_weights(subtrain.features.ncols(), config.init, config.seed);
    train_from(weights, subtrain, validation, config)
}

/// Gradient descent starting at `weights`.
///
/// Each iteration takes the negative AUM gradient as direction and a step
/// size chosen by `config.variant`, then stops when the direction is zero,
/// when subtrain AUM decreased by less than `config.aum_tolerance`, or after
/// `config.max_steps` iterations.
pub fn train_from<'a>(
    mut weights: Array1<f64>,
    subtrain: Split<'a>,
    validation: Option<Split<'a>>,
    config: &TrainConfig,
) -> Result<(Model, TrainLog)> {
    config.validate()?;
    let p = weights.len();
    subtrain.check("subtrain", p)?;
    if let Some(v) = &validation {
        v.check("validation", p)?;
    }
    let search_split = match config.variant {
        TrainVariant::MaxAucValidation => {
            validation.ok_or_else(|| Error::InvalidArgument("max-auc-validation needs a validation set".into()))?
        }
        _ => subtrain,
    };
    let start = Instant::now();
    let elapsed = || config.record_time.then(|| start.elapsed().as_nanos());
    let evaluate = |w: &Array1<f64>| -> Result<(f64, f64, Option<f64>)> {
        let (aum, auc) = subtrain.evaluate(w.view())?;
        let val = validation.map(|v| v.evaluate(w.view()).map(|e| e.1)).transpose()?;
        Ok((aum, auc, val))
    };

    let mut log = TrainLog::default();
    let (mut aum, auc, auc_val) = evaluate(&weights)?;
    log.steps.push(TrainStep {
        step: 0,
        step_size: 0.0,
        aum_subtrain: aum,
        auc_subtrain: auc,
        auc_validation: auc_val,
        events_explored: 0,
        elapsed_ns: elapsed(),
    });
    for it in 1..=config.max_steps {
        let pred = predict(subtrain.features, weights.view())?;
        let g = aum_subgradient(pred.as_slice().expect("contiguous"), subtrain.model)?;
        let d = descent_direction(subtrain.features, g.view())?;
        if d.iter().all(|&x| x == 0.0) {
            log.stationary_start = it == 1;
            break;
        }
        let (step_size, events) = match config.variant {
            TrainVariant::Grid => {
                let points = grid_evaluate(
                    weights.view(),
                    d.view(),
                    subtrain.features,
                    subtrain.model,
                    &config.grid,
                )?;
                let best = points
                    .iter()
                    .fold(None::<(f64, f64)>, |best, g| match best {
                        Some((s, a)) if a < g.aum || (a == g.aum && s <= g.step) => best,
                        _ => Some((g.step, g.aum)),
                    })
                    .expect("non-empty grid");
                (best.0, 0)
            }
            variant => {
                let (path_variant, objective) = match variant {
                    TrainVariant::FirstMin => (Variant::FirstMin, Objective::MinAum),
                    TrainVariant::Linear => (Variant::Linear, Objective::MinAum),
                    TrainVariant::Quadratic => (Variant::Quadratic, Objective::MinAum),
                    _ => (Variant::MaxAuc, Objective::MaxAuc),
                };
                let path = line_search(
                    weights.view(),
                    d.view(),
                    search_split.features,
                    search_split.model,
                    path_variant,
                    config.max_events,
                )?;
                (path.choose_step(objective), path.events)
            }
        };
        weights.scaled_add(step_size, &d);
        let (new_aum, auc, auc_val) = evaluate(&weights)?;
        log.steps.push(TrainStep {
            step: it,
            step_size,
            aum_subtrain: new_aum,
            auc_subtrain: auc,
            auc_validation: auc_val,
            events_explored: events,
            elapsed_ns: elapsed(),
        });
        let decrease = aum - new_aum;
        aum = new_aum;
        if decrease < config.aum_tolerance {
            break;
        }
    }
    Ok((Model { weights }, log))
}
