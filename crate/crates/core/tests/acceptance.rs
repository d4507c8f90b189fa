//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any hard criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use aum_search::cli::{bench, BenchArgs, VariantArg};
use aum_search::descent::{aum_subgradient, descent_direction, train, Init, Split, TrainConfig, TrainVariant};
use aum_search::path::{build_lines, line_search, Objective, PathState, Variant};
use aum_search::synth::{binary_unbalanced, changepoint_nonmono, Classes};
use aum_search::{Breakpoint, ErrorModel};
use common::*;
use ndarray::{array, Array1, Array2};
use rand::Rng;

const EXACT_TOL: f64 = 1e-8;
const INCREMENTAL_TOL: f64 = 1e-10;
const GRADIENT_REL_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-6;
const SLOPE_FD_TOL: f64 = 1e-6;
const FIRST_MIN_TOL: f64 = 1e-9;
const MONOTONE_TOL: f64 = 1e-9;
/// Rates are sums of B float deltas, so AUC = 1 holds up to accumulated
/// rounding. One tied pair would cost at least 1 / (2 * 10 * 90).
const AUC_ONE_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    soft: bool,
    detail: String,
}

impl Outcome {
    fn hard(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            soft: false,
            detail,
        }
    }
}

fn c1_c2() -> (Outcome, Outcome, Vec<(usize, usize, usize)>) {
    let start = Instant::now();
    let mut rng = rng(2024);
    let mut worst = PathStats::default();
    let mut points = 0;
    let mut counts = Vec::new();
    let n_instances = 500;
    for k in 0..n_instances {
        let inst = match k % 10 {
            0 | 2 | 4 | 6 | 8 => random_binary_instance(&mut rng, k / 2),
            5 => {
                let n = rng.random_range(2..=10);
                let p = rng.random_range(1..=5);
                let data = changepoint_nonmono(n, p, k as u64).unwrap();
                Instance {
                    w: gaussian_vector(&mut rng, p),
                    d: gaussian_vector(&mut rng, p),
                    x: data.features,
                    model: data.model,
                }
            }
            _ => random_changepoint_instance(&mut rng, k / 2),
        };
        let s = verify_path(&inst);
        points += s.points_checked;
        counts.push((inst.model.len(), s.events, s.crossings));
        worst.max_aum_error = worst.max_aum_error.max(s.max_aum_error);
        worst.max_auc_error = worst.max_auc_error.max(s.max_auc_error);
        worst.max_at_error = worst.max_at_error.max(s.max_at_error);
        worst.max_slope_error = worst.max_slope_error.max(s.max_slope_error);
        worst.max_auc_after_error = worst.max_auc_after_error.max(s.max_auc_after_error);
    }
    let secs = start.elapsed().as_secs_f64();
    let c1 = Outcome::hard(
        worst.max_aum_error <= EXACT_TOL
            && worst.max_auc_error <= EXACT_TOL
            && worst.max_at_error <= EXACT_TOL
            && secs < 60.0,
        format!(
            "{n_instances} instances, {points} interior points; max |dAUM| = {:.1e}, max |dAUC| = {:.1e}, \
             max |dAUC at event| = {:.1e} (tol {EXACT_TOL:.0e}); {secs:.1} s (limit 60 s)",
            worst.max_aum_error, worst.max_auc_error, worst.max_at_error
        ),
    );
    let c2 = Outcome::hard(
        worst.max_slope_error <= INCREMENTAL_TOL && worst.max_auc_after_error <= INCREMENTAL_TOL,
        format!(
            "after every event: max |slope - batch| = {:.1e}, max |AUC after - batch| = {:.1e} (tol {INCREMENTAL_TOL:.0e})",
            worst.max_slope_error, worst.max_auc_after_error
        ),
    );
    (c1, c2, counts)
}

/// Smallest gap between sorted thresholds.
fn min_gap(t: &[f64]) -> f64 {
    let mut t = t.to_vec();
    t.sort_by(f64::total_cmp);
    t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

fn c3() -> Outcome {
    let mut rng = rng(3);
    let mut worst_grad: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    let mut done = 0;
    let mut k = 0;
    while done < 100 {
        k += 1;
        let inst = if k % 2 == 0 {
            random_binary_instance(&mut rng, 0)
        } else {
            random_changepoint_instance(&mut rng, 0)
        };
        let pred = predictions(&inst.x, &inst.w, &inst.d, 0.0);
        // tie-free: no threshold within reach of a finite-difference step
        if min_gap(&thresholds(&pred, &inst.model)) < 1e-3 {
            continue;
        }
        let g = aum_subgradient(&pred, &inst.model).unwrap();
        let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..pred.len() {
            let mut up = pred.clone();
            let mut down = pred.clone();
            up[i] += FD_STEP;
            down[i] -= FD_STEP;
            let fd = (brute_aum(&up, &inst.model) - brute_aum(&down, &inst.model)) / (2.0 * FD_STEP);
            worst_grad = worst_grad.max((fd - g[i]).abs() / scale);
        }
        let lines = build_lines(inst.w.view(), inst.d.view(), inst.x.view(), &inst.model).unwrap();
        let mut state = PathState::init(&lines, &inst.model).unwrap();
        if state.peek_next_step().is_some_and(|s| s <= 10.0 * FD_STEP) {
            continue;
        }
        let forward = (brute_aum_t(&thresholds_at(&inst, FD_STEP), &inst.model)
            - brute_aum_t(&thresholds_at(&inst, 0.0), &inst.model))
            / FD_STEP;
        worst_slope = worst_slope.max((forward - state.slope()).abs());
        done += 1;
    }
    Outcome::hard(
        worst_grad <= GRADIENT_REL_TOL && worst_slope <= SLOPE_FD_TOL,
        format!(
            "{done} tie-free instances: max relative |g - central diff| = {worst_grad:.1e} (tol {GRADIENT_REL_TOL:.0e}, h = {FD_STEP:.0e}); \
             max |initial slope - forward diff| = {worst_slope:.1e} (tol {SLOPE_FD_TOL:.0e})"
        ),
    )
}

/// 20 lines with increasing intercepts and decreasing slopes, so every pair
/// crosses at its own positive step size.
fn generic_twenty() -> (Array2<f64>, Array1<f64>, Array1<f64>, ErrorModel) {
    let mut rng = rng(20);
    let n = 20;
    let mut x = Array2::zeros((n, 2));
    for i in 0..n {
        x[[i, 0]] = -(i as f64 + rng.random_range(0.0..0.5));
        x[[i, 1]] = i as f64 + rng.random_range(0.0..0.5);
    }
    let labels: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    (
        x,
        array![1.0, 0.0],
        array![0.0, 1.0],
        ErrorModel::binary(&labels).unwrap(),
    )
}

fn c4(counts: &[(usize, usize, usize)]) -> Outcome {
    let over = counts.iter().filter(|(b, e, c)| e > c || *c > b * (b - 1) / 2).count();
    let (x, w, d, model) = generic_twenty();
    let lines = build_lines(w.view(), d.view(), x.view(), &model).unwrap();
    let mut state = PathState::init(&lines, &model).unwrap();
    let mut events = 0;
    while state.advance().unwrap().is_some() {
        events += 1;
    }
    let path = line_search(w.view(), d.view(), x.view(), &model, Variant::Quadratic, None).unwrap();
    Outcome::hard(
        over == 0 && events == 190 && state.crossings() == 190 && path.events == 190,
        format!(
            "{} runs, {over} exceed B(B-1)/2; generic B = 20 instance: {events} event steps, {} crossings, path reports {} (expect 190)",
            counts.len(),
            state.crossings(),
            path.events
        ),
    )
}

fn c5() -> Outcome {
    let mut rng = rng(5);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let inst = random_binary_instance(&mut rng, k);
        let d = if k % 2 == 0 {
            let pred = predictions(&inst.x, &inst.w, &inst.d, 0.0);
            let g = aum_subgradient(&pred, &inst.model).unwrap();
            descent_direction(inst.x.view(), g.view()).unwrap()
        } else {
            inst.d.clone()
        };
        let run = |v| line_search(inst.w.view(), d.view(), inst.x.view(), &inst.model, v, None).unwrap();
        let first = run(Variant::FirstMin);
        let full = run(Variant::Quadratic);
        let chosen = first.query(first.choose_step(Objective::MinAum)).unwrap().aum;
        let global = full.segments.iter().map(|s| s.aum_at_lo).fold(f64::INFINITY, f64::min);
        worst = worst.max((chosen - global).abs());
    }
    Outcome::hard(
        worst <= FIRST_MIN_TOL,
        format!(
            "200 binary instances: max |AUM(first-min step) - global path min| = {worst:.1e} (tol {FIRST_MIN_TOL:.0e})"
        ),
    )
}

fn c6() -> Outcome {
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
    )
    .unwrap();
    let inst = Instance {
        x: array![[1.0, 0.0], [0.0, 1.0]],
        w: array![0.0, 0.0],
        d: array![-1.0, 1.0],
        model,
    };
    let lines = build_lines(inst.w.view(), inst.d.view(), inst.x.view(), &inst.model).unwrap();
    let mut state = PathState::init(&lines, &inst.model).unwrap();
    let before = (state.slope(), state.auc_after());
    let first = state.advance().unwrap().unwrap();
    let anchors = before == (-2.0, 0.0) && first.slope_after == 0.0 && first.auc_at == 0.5 && first.auc_after == 1.0;
    let oracle = |s: f64, tol: f64| brute_auc_t(&thresholds_at(&inst, s), &inst.model, tol);
    let oracle_ok = oracle(first.step / 2.0, 0.0) == 0.0
        && oracle(first.step, 1e-9) == 0.5
        && oracle((first.step + 0.5) / 2.0, 0.0) == 1.0;
    let path = line_search(
        inst.w.view(),
        inst.d.view(),
        inst.x.view(),
        &inst.model,
        Variant::Quadratic,
        None,
    )
    .unwrap();
    let loop_seg = path.segments.iter().find(|s| s.auc_on_interval == 2.0);
    let loop_ok = loop_seg.is_some_and(|s| oracle(s.representative_step(), 0.0) == 2.0);
    let stats = verify_path(&inst);
    let verified =
        stats.max_aum_error <= EXACT_TOL && stats.max_auc_error <= EXACT_TOL && stats.max_at_error <= EXACT_TOL;

    // generated two-example data: one of the two directions passes a loop
    let data = changepoint_nonmono(2, 2, 6).unwrap();
    let e0 = array![1.0, 0.0];
    let synth_max = [1.0, -1.0]
        .iter()
        .map(|sign| {
            let d = &e0 * *sign;
            let p = line_search(
                Array1::zeros(2).view(),
                d.view(),
                data.features.view(),
                &data.model,
                Variant::Quadratic,
                None,
            )
            .unwrap();
            p.segments
                .iter()
                .map(|s| s.auc_on_interval)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome::hard(
        anchors && oracle_ok && loop_ok && verified && synth_max > 1.0,
        format!(
            "first event at s = {}: slope {} -> {}, AUC {} -> {} (at) -> {} (after); AUC = 2 on [{}, {:?}); \
             oracle agrees: {}; generated 2-example data reaches AUC {synth_max}",
            first.step,
            before.0,
            first.slope_after,
            before.1,
            first.auc_at,
            first.auc_after,
            loop_seg.map_or(f64::NAN, |s| s.step_lo),
            loop_seg.and_then(|s| s.step_hi),
            oracle_ok && verified
        ),
    )
}

fn c7() -> Outcome {
    let seeds = 1..=10u64;
    let (mut reached_all, mut monotone_all, mut auc_one) = (true, true, 0);
    let mut worst_auc: f64 = 1.0;
    let mut max_steps = 0;
    for seed in seeds.clone() {
        let data = binary_unbalanced(100, 2, 0.1, Classes::Separable { margin: 0.5 }, seed).unwrap();
        let model = data.error_model().unwrap();
        let config = TrainConfig {
            variant: TrainVariant::FirstMin,
            max_steps: 100,
            init: Init::Gaussian(1.0),
            seed,
            ..TrainConfig::default()
        };
        let split = Split {
            features: data.features.view(),
            model: &model,
        };
        let (_, log) = train(split, None, &config).unwrap();
        let last = log.steps.last().unwrap();
        monotone_all &= log
            .steps
            .windows(2)
            .all(|w| w[1].aum_subtrain <= w[0].aum_subtrain + MONOTONE_TOL);
        match log.steps.iter().position(|s| s.aum_subtrain < 1e-3) {
            Some(k) => max_steps = max_steps.max(k),
            None => reached_all = false,
        }
        if (last.auc_subtrain - 1.0).abs() <= AUC_ONE_TOL {
            auc_one += 1;
        }
        worst_auc = worst_auc.min(last.auc_subtrain);
    }
    let runs = seeds.count();
    Outcome::hard(
        reached_all && max_steps <= 100 && monotone_all && auc_one == runs,
        format!(
            "separable n = 100, imbalance 0.1, {runs} seeds: AUM < 1e-3 in all: {reached_all} (at most {max_steps} steps); \
             non-increasing: {monotone_all}; final AUC = 1 (tol {AUC_ONE_TOL:.0e}) in {auc_one}/{runs}, lowest {worst_auc}"
        ),
    )
}

fn c8() -> Outcome {
    let start = Instant::now();
    let sizes = vec![50, 100, 200, 400, 800];
    let args = BenchArgs {
        sizes: sizes.clone(),
        seeds: vec![1, 2, 3, 4],
        variants: vec![VariantArg::FirstMin, VariantArg::Linear],
        p: 2,
        imbalance: 0.1,
        separation: 1.0,
        max_steps: 100,
        aum_tol: 1e-3,
        timings: false,
        out: None,
    };
    let rows = bench(&args).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let linear_ok = rows
        .iter()
        .filter(|r| r.variant == VariantArg::Linear)
        .all(|r| r.mean_events_per_step <= r.n as f64);
    // least-squares slope of log(mean events) on log(n) for first-min
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .map(|&n| {
            let m: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n && r.variant == VariantArg::FirstMin)
                .map(|r| r.mean_events_per_step)
                .collect();
            (
                (n as f64).ln(),
                (m.iter().sum::<f64>() / m.len() as f64).max(1e-12).ln(),
            )
        })
        .collect();
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64,
        pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64,
    );
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let cells: Vec<bool> = rows
        .iter()
        .filter(|r| r.variant == VariantArg::FirstMin)
        .map(|f| {
            let l = rows
                .iter()
                .find(|r| r.variant == VariantArg::Linear && r.n == f.n && r.seed == f.seed)
                .unwrap();
            f.gradient_steps <= l.gradient_steps
        })
        .collect();
    let frac = cells.iter().filter(|&&b| b).count() as f64 / cells.len() as f64;
    Outcome {
        pass: linear_ok && slope < 2.0 && frac >= 0.75 && secs < 600.0,
        soft: true,
        detail: format!(
            "linear events/step <= n: {linear_ok}; first-min events/step log-log slope {slope:.2} (< 2); \
             first-min steps <= linear steps in {:.0}% of cells (>= 75%); {secs:.1} s (limit 600 s)",
            100.0 * frac
        ),
    }
}

fn run_cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_aum"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run aum");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn c9() -> Outcome {
    let runs: Vec<Vec<(i32, Vec<u8>)>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path();
            let mut outputs = vec![
                run_cli(
                    &[
                        "synth",
                        "--kind",
                        "binary",
                        "--n",
                        "40",
                        "--imbalance",
                        "0.25",
                        "--seed",
                        "3",
                        "--out",
                        "bin",
                    ],
                    p,
                ),
                run_cli(
                    &[
                        "synth",
                        "--kind",
                        "changepoint",
                        "--n",
                        "8",
                        "--p",
                        "3",
                        "--seed",
                        "3",
                        "--out",
                        "cp",
                    ],
                    p,
                ),
                run_cli(
                    &["path", "--features", "bin/features.csv", "--labels", "bin/labels.csv"],
                    p,
                ),
                run_cli(
                    &[
                        "path",
                        "--features",
                        "cp/features.csv",
                        "--breakpoints",
                        "cp/breakpoints.csv",
                        "--variant",
                        "first-min",
                    ],
                    p,
                ),
                run_cli(
                    &[
                        "train",
                        "--features",
                        "bin/features.csv",
                        "--labels",
                        "bin/labels.csv",
                        "--seed",
                        "5",
                        "--weights-out",
                        "w.csv",
                    ],
                    p,
                ),
                run_cli(
                    &[
                        "train",
                        "--features",
                        "cp/features.csv",
                        "--breakpoints",
                        "cp/breakpoints.csv",
                        "--variant",
                        "grid",
                        "--seed",
                        "5",
                    ],
                    p,
                ),
                run_cli(&["bench", "--sizes", "10,20", "--seeds", "1,2", "--max-steps", "10"], p),
            ];
            std::fs::write(p.join("d.csv"), "value\n1\n-1\n").unwrap();
            outputs.push(run_cli(
                &[
                    "oracle",
                    "--features",
                    "bin/features.csv",
                    "--labels",
                    "bin/labels.csv",
                    "--weights",
                    "w.csv",
                    "--direction",
                    "d.csv",
                    "--steps",
                    "0,0.5,1,2",
                ],
                p,
            ));
            for f in [
                "bin/features.csv",
                "bin/labels.csv",
                "cp/features.csv",
                "cp/breakpoints.csv",
                "w.csv",
            ] {
                outputs.push((0, std::fs::read(p.join(f)).unwrap()));
            }
            outputs
        })
        .collect();
    let all_ok = runs[0].iter().all(|(code, _)| *code == 0);
    let identical = runs[0] == runs[1];
    Outcome::hard(
        all_ok && identical,
        format!(
            "synth, path, train, bench and oracle run twice with fixed seeds: {} outputs, all exit 0: {all_ok}, byte-identical: {identical}",
            runs[0].len()
        ),
    )
}

fn main() {
    let (c1, c2, counts) = c1_c2();
    let results = [
        ("1 oracle equivalence", c1),
        ("2 incremental updates", c2),
        ("3 gradient check", c3()),
        ("4 combinatorial bound", c4(&counts)),
        ("5 first-min optimality (binary)", c5()),
        ("6 looping ROC instance", c6()),
        ("7 training on separable data", c7()),
        ("8 scaling trend", c8()),
        ("9 determinism", c9()),
    ];
    let mut failed = false;
    for (name, o) in &results {
        let tag = match (o.pass, o.soft) {
            (true, _) => "PASS",
            (false, true) => "FAIL (soft, reported only)",
            (false, false) => "FAIL",
        };
        println!("criterion {name}: {tag}: {}", o.detail);
        failed |= !o.pass && !o.soft;
    }
    if failed {
        std::process::exit(1);
    }
}
