//! Brute-force references and random instances shared by the integration
//! tests. The reference computations never call the library's ROC or sweep
//! code; [`verify_path`] compares the sweep against them.

#![allow(dead_code)]

use aum_search::path::{build_lines, line_search, PathState, Variant};
use aum_search::{Breakpoint, ErrorModel};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Thresholds `v - yhat` of every breakpoint.
pub fn thresholds(pred: &[f64], model: &ErrorModel) -> Vec<f64> {
    model.breakpoints().iter().map(|b| b.value - pred[b.example]).collect()
}

/// FP and FN when the constant `c` is added to every prediction, by direct
/// summation over breakpoints whose threshold `t[b]` lies below `c`.
pub fn rates_at(t: &[f64], model: &ErrorModel, c: f64) -> (f64, f64) {
    let mut fp = 0.0;
    let mut fn_ = 1.0;
    for (b, &tb) in model.breakpoints().iter().zip(t) {
        if tb < c {
            fp += b.delta_fp;
            fn_ += b.delta_fn;
        }
    }
    (fp, fn_)
}

/// Distinct thresholds, where values within `tol` of the previous one in
/// sorted order join its group. Returns (first, last) of each group.
fn groups(t: &[f64], tol: f64) -> Vec<(f64, f64)> {
    let mut t = t.to_vec();
    t.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for x in t {
        match out.last_mut() {
            Some(g) if x - g.1 <= tol => g.1 = x,
            _ => out.push((x, x)),
        }
    }
    out
}

/// AUM by integrating `min(FP, FN)` piecewise between thresholds.
pub fn brute_aum_t(t: &[f64], model: &ErrorModel) -> f64 {
    let g = groups(t, 0.0);
    g.windows(2)
        .map(|w| {
            let (fp, fn_) = rates_at(t, model, (w[0].1 + w[1].0) / 2.0);
            (w[1].0 - w[0].1) * fp.min(fn_)
        })
        .sum()
}

/// AUC by evaluating the rates on every gap between threshold groups and
/// summing trapezoids; thresholds closer than `tol` count as tied.
pub fn brute_auc_t(t: &[f64], model: &ErrorModel, tol: f64) -> f64 {
    let g = groups(t, tol);
    let mut probes = vec![g[0].0 - 1.0];
    probes.extend(g.windows(2).map(|w| (w[0].1 + w[1].0) / 2.0));
    probes.push(g[g.len() - 1].1 + 1.0);
    let pts: Vec<(f64, f64)> = probes.iter().map(|&c| rates_at(t, model, c)).collect();
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * ((1.0 - w[1].1) + (1.0 - w[0].1)) / 2.0)
        .sum()
}

pub fn brute_aum(pred: &[f64], model: &ErrorModel) -> f64 {
    brute_aum_t(&thresholds(pred, model), model)
}

pub fn brute_auc(pred: &[f64], model: &ErrorModel, tol: f64) -> f64 {
    brute_auc_t(&thresholds(pred, model), model, tol)
}

/// Riemann sum of `min(FP, FN)` with `cells` cells across the threshold
/// range.
pub fn riemann_aum(pred: &[f64], model: &ErrorModel, cells: usize) -> f64 {
    let t = thresholds(pred, model);
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h = (hi - lo) / cells as f64;
    (0..cells)
        .map(|k| {
            let (fp, fn_) = rates_at(&t, model, lo + (k as f64 + 0.5) * h);
            fp.min(fn_) * h
        })
        .sum()
}

/// Predictions `X w + s X d`, computed row by row. Examples with equal
/// `(x.w, x.d)` get bitwise equal predictions at every `s`.
pub fn predictions(x: &Array2<f64>, w: &Array1<f64>, d: &Array1<f64>, s: f64) -> Vec<f64> {
    let dot = |row: ndarray::ArrayView1<f64>, v: &Array1<f64>| -> f64 { row.iter().zip(v).map(|(a, b)| a * b).sum() };
    x.rows().into_iter().map(|row| dot(row, w) + s * dot(row, d)).collect()
}

/// Threshold of every breakpoint at step `s`, evaluated as the line
/// `(v - x.w) + s (-x.d)` so that coincident lines stay bitwise equal.
pub fn thresholds_at(inst: &Instance, s: f64) -> Vec<f64> {
    let at0 = predictions(&inst.x, &inst.w, &inst.d, 0.0);
    let rate = predictions(&inst.x, &Array1::zeros(inst.w.len()), &inst.d, 1.0);
    inst.model
        .breakpoints()
        .iter()
        .map(|b| (b.value - at0[b.example]) + s * -rate[b.example])
        .collect()
}

/// AUM slope at `s` from the threshold order there:
/// `sum_k (slope[q_k] - slope[q_{k-1}]) * min(FP, FN)` over inner gaps.
pub fn batch_slope(inst: &Instance, s: f64) -> f64 {
    let t = thresholds_at(inst, s);
    let rate = predictions(&inst.x, &Array1::zeros(inst.w.len()), &inst.d, 1.0);
    let bps = inst.model.breakpoints();
    let mut order: Vec<usize> = (0..bps.len()).collect();
    order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    let (mut fp, mut fn_) = (0.0, 1.0);
    let mut slope = 0.0;
    for k in 1..order.len() {
        let (prev, cur) = (&bps[order[k - 1]], &bps[order[k]]);
        fp += prev.delta_fp;
        fn_ += prev.delta_fn;
        slope += (-rate[cur.example] + rate[prev.example]) * fp.min(fn_);
    }
    slope
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || gaussian(rng))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, p: usize) -> Array1<f64> {
    (0..p).map(|_| gaussian(rng)).collect()
}

/// Small integers, which put many lines through common points.
pub fn integer_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || rng.random_range(-2i32..=2) as f64)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    assert!(n >= 2);
    let mut y: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    y[0] = 1;
    y[1] = -1;
    y
}

/// Random error functions with up to `max_per_example` breakpoints per
/// example; rates move between 0 and 1 in arbitrary order, so FP and FN
/// need not be monotone.
pub fn random_changepoint_model(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_per_example: usize,
    integer_values: bool,
) -> ErrorModel {
    let mut bps = Vec::new();
    for i in 0..n {
        let k = rng.random_range(1..=max_per_example);
        let mut values: Vec<f64> = (0..k)
            .map(|_| {
                if integer_values {
                    rng.random_range(-3i32..=3) as f64
                } else {
                    3.0 * gaussian(rng)
                }
            })
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let k = values.len();
        // example 0 starts with FN = 1, example 1 ends with FP = 1
        let mut level = (
            0.0,
            if i == 0 {
                1.0
            } else {
                f64::from(rng.random_bool(0.5) as u8)
            },
        );
        for (j, &v) in values.iter().enumerate() {
            let next = if j + 1 == k {
                (
                    if i == 1 {
                        1.0
                    } else {
                        f64::from(rng.random_bool(0.5) as u8)
                    },
                    0.0,
                )
            } else {
                (
                    f64::from(rng.random_bool(0.5) as u8),
                    f64::from(rng.random_bool(0.5) as u8),
                )
            };
            if next == level {
                continue;
            }
            bps.push(Breakpoint::new(v, next.0 - level.0, next.1 - level.1, i));
            level = next;
        }
        if !bps.iter().any(|b| b.example == i) {
            // all states coincided: give the example one FP step
            bps.push(Breakpoint::new(values[0], 1.0, 0.0, i));
        }
    }
    ErrorModel::raw(bps, n)
        .and_then(|m| m.normalize())
        .expect("valid random model")
}

/// Inputs of one line search.
#[derive(Clone, Debug)]
pub struct Instance {
    pub x: Array2<f64>,
    pub w: Array1<f64>,
    pub d: Array1<f64>,
    pub model: ErrorModel,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PathStats {
    pub events: usize,
    pub crossings: usize,
    pub points_checked: usize,
    pub max_aum_error: f64,
    pub max_auc_error: f64,
    pub max_at_error: f64,
    pub max_slope_error: f64,
    pub max_auc_after_error: f64,
}

/// Tolerance for treating thresholds as tied exactly at an event step.
pub fn at_tolerance(t: &[f64]) -> f64 {
    let scale = t.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    1e-9 * scale
}

fn interior_points(lo: f64, hi: Option<f64>) -> Vec<f64> {
    match hi {
        Some(hi) => (1..=5).map(|k| lo + (hi - lo) * k as f64 / 6.0).collect(),
        None => [0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|f| lo + f * (1.0 + lo)).collect(),
    }
}

/// Runs the full sweep and records the largest deviations from the brute
/// force references:
///
/// * AUM and AUC queried from the path at 5 interior points per segment;
/// * AUC exactly at each event step (and at zero);
/// * after every event, the running slope and AUC of the sweep state
///   against a from-scratch computation inside the next segment.
pub fn verify_path(inst: &Instance) -> PathStats {
    let Instance { x, w, d, model } = inst;
    let mut stats = PathStats::default();
    let path = line_search(w.view(), d.view(), x.view(), model, Variant::Quadratic, None).expect("line search");
    assert!(path.explored_to.is_none() && !path.truncated);
    stats.events = path.events;
    for seg in &path.segments {
        for s in interior_points(seg.step_lo, seg.step_hi) {
            let v = path.query(s).expect("inside path");
            let t = thresholds_at(inst, s);
            stats.max_aum_error = stats.max_aum_error.max((v.aum - brute_aum_t(&t, model)).abs());
            stats.max_auc_error = stats.max_auc_error.max((v.auc - brute_auc_t(&t, model, 0.0)).abs());
            stats.points_checked += 1;
        }
        let t = thresholds_at(inst, seg.step_lo);
        let tol = if seg.step_lo == 0.0 { 0.0 } else { at_tolerance(&t) };
        let at = path.query(seg.step_lo).expect("inside path").auc;
        stats.max_at_error = stats.max_at_error.max((at - brute_auc_t(&t, model, tol)).abs());
    }

    let lines = build_lines(w.view(), d.view(), x.view(), model).expect("lines");
    let mut state = PathState::init(&lines, model).expect("init");
    while let Some(out) = state.advance().expect("advance") {
        let next = state.peek_next_step();
        let mid = match next {
            Some(hi) => (out.step + hi) / 2.0,
            None => out.step + 1.0,
        };
        let slope = batch_slope(inst, mid);
        stats.max_slope_error = stats.max_slope_error.max((state.slope() - slope).abs());
        let auc = brute_auc_t(&thresholds_at(inst, mid), model, 0.0);
        stats.max_auc_after_error = stats.max_auc_after_error.max((state.auc_after() - auc).abs());
    }
    stats.crossings = state.crossings();
    stats
}

/// Random binary instance with `n` in `2..=30` and `p` in `1..=5`. Every
/// third instance uses small integer data, which makes many lines meet at
/// common points.
pub fn random_binary_instance(rng: &mut ChaCha8Rng, k: usize) -> Instance {
    let n = rng.random_range(2..=30);
    let p = rng.random_range(1..=5);
    let (x, w, d) = if k % 3 == 2 {
        let x = integer_matrix(rng, n, p);
        let w = integer_matrix(rng, 1, p).row(0).to_owned();
        let d = integer_matrix(rng, 1, p).row(0).to_owned();
        (x, w, d)
    } else {
        (
            gaussian_matrix(rng, n, p),
            gaussian_vector(rng, p),
            gaussian_vector(rng, p),
        )
    };
    let labels = random_labels(rng, n);
    Instance {
        x,
        w,
        d,
        model: ErrorModel::binary(&labels).expect("both classes"),
    }
}

/// Random changepoint instance with `n` in `2..=10` and at most 5
/// breakpoints per example.
pub fn random_changepoint_instance(rng: &mut ChaCha8Rng, k: usize) -> Instance {
    let n = rng.random_range(2..=10);
    let p = rng.random_range(1..=5);
    let integer = k % 3 == 2;
    let (x, w, d) = if integer {
        let x = integer_matrix(rng, n, p);
        let w = integer_matrix(rng, 1, p).row(0).to_owned();
        let d = integer_matrix(rng, 1, p).row(0).to_owned();
        (x, w, d)
    } else {
        (
            gaussian_matrix(rng, n, p),
            gaussian_vector(rng, p),
            gaussian_vector(rng, p),
        )
    };
    Instance {
        model: random_changepoint_model(rng, n, 5, integer),
        x,
        w,
        d,
    }
}
