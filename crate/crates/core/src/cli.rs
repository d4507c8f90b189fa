//! The `aum` command line: `path`, `train`, `oracle`, `synth` and `bench`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::descent::{self, aum_subgradient, descent_direction, Init, Split, TrainConfig, TrainVariant};
use crate::error::{Error, Result};
use crate::error_model::{load_breakpoints, load_labels, ErrorModel, ExampleIds};
use crate::io;
use crate::linear::predict;
use crate::path::{line_search, Objective, Variant};
use crate::roc::grid_evaluate;
use crate::synth::{self, Classes};

#[derive(Debug, Parser)]
#[command(name = "aum", version, about = "Exact AUM/AUC line search for linear models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute AUM and AUC as exact functions of the step size.
    Path(PathArgs),
    /// Train a linear model by gradient descent on AUM.
    Train(TrainArgs),
    /// Evaluate AUM and AUC from scratch at given step sizes.
    Oracle(OracleArgs),
    /// Write a synthetic data set.
    Synth(SynthArgs),
    /// Measure line-search work per gradient step on synthetic data.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    FirstMin,
    Linear,
    Quadratic,
    MaxAucValidation,
    Grid,
}

impl VariantArg {
    fn train_variant(self) -> TrainVariant {
        match self {
            VariantArg::FirstMin => TrainVariant::FirstMin,
            VariantArg::Linear => TrainVariant::Linear,
            VariantArg::Quadratic => TrainVariant::Quadratic,
            VariantArg::MaxAucValidation => TrainVariant::MaxAucValidation,
            VariantArg::Grid => TrainVariant::Grid,
        }
    }

    fn path_variant(self) -> Result<Variant> {
        match self {
            VariantArg::FirstMin => Ok(Variant::FirstMin),
            VariantArg::Linear => Ok(Variant::Linear),
            VariantArg::Quadratic => Ok(Variant::Quadratic),
            VariantArg::MaxAucValidation => Ok(Variant::MaxAuc),
            VariantArg::Grid => Err(Error::InvalidArgument(
                "the grid variant has no path; use `oracle` to evaluate a grid".into(),
            )),
        }
    }

    fn name(self) -> &'static str {
        match self {
            VariantArg::FirstMin => "first-min",
            VariantArg::Linear => "linear",
            VariantArg::Quadratic => "quadratic",
            VariantArg::MaxAucValidation => "max-auc-validation",
            VariantArg::Grid => "grid",
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Targets {
    /// CSV `example_id,label` with labels -1 or 1.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// CSV `example_id,value,delta_fp,delta_fn`.
    #[arg(long)]
    pub breakpoints: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV `example_id,x1,...,xp`.
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub targets: Targets,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Single-column CSV `value`; zeros if omitted.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Single-column CSV `value`; the negative AUM gradient if omitted.
    #[arg(long)]
    pub direction: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VariantArg::Quadratic)]
    pub variant: VariantArg,
    /// Event budget (default: every pair of breakpoints plus their count).
    #[arg(long)]
    pub max_events: Option<usize>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Initial weights; drawn from `--init` if omitted.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VariantArg::FirstMin)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub aum_tol: f64,
    /// Fraction of examples held out for validation.
    #[arg(long, default_value_t = 0.25)]
    pub validation_fraction: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Gaussian)]
    pub init: InitArg,
    #[arg(long, default_value_t = 1.0)]
    pub init_scale: f64,
    /// Comma-separated step sizes for the grid variant.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub max_events: Option<usize>,
    /// Fill the `elapsed_ns` column.
    #[arg(long)]
    pub timings: bool,
    /// Training log CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the final weights.
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Zeros,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub direction: PathBuf,
    /// Comma-separated step sizes.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub steps: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Binary,
    Changepoint,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Fraction of positive examples (binary only).
    #[arg(long, default_value_t = 0.1)]
    pub imbalance: f64,
    /// Distance between class means on the first feature (binary only).
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    /// Make the classes separable with this margin (binary only).
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory for `features.csv` and `labels.csv` or
    /// `breakpoints.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated, ascending example counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "first-min,linear,quadratic"
    )]
    pub variants: Vec<VariantArg>,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value_t = 0.1)]
    pub imbalance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 100)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub aum_tol: f64,
    /// Fill the `elapsed_ns` column.
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command. CSV output goes to `--out` or `stdout`; the
/// one-line summary goes to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Path(args) => cmd_path(&args, stdout, stderr),
        Command::Train(args) => cmd_train(&args, stdout, stderr),
        Command::Oracle(args) => cmd_oracle(&args, stdout),
        Command::Synth(args) => cmd_synth(&args, stderr),
        Command::Bench(args) => cmd_bench(&args, stdout),
    }
}

struct Data {
    features: Array2<f64>,
    model: ErrorModel,
}

fn load_data(args: &DataArgs) -> Result<Data> {
    let mut ids = ExampleIds::new();
    let features = io::read_features(io::open(&args.features)?, &mut ids).map_err(|e| e.in_file(&args.features))?;
    let model = match (&args.targets.labels, &args.targets.breakpoints) {
        (Some(path), None) => {
            let labels = load_labels(io::open(path)?, &mut ids, true).map_err(|e| e.in_file(path))?;
            ErrorModel::binary(&labels).map_err(|e| e.in_file(path))?
        }
        (None, Some(path)) => load_breakpoints(io::open(path)?, &mut ids, true).map_err(|e| e.in_file(path))?,
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --labels and --breakpoints".into(),
            ))
        }
    };
    Ok(Data { features, model })
}

fn load_vector(path: &Path, p: usize, name: &str) -> Result<Array1<f64>> {
    let v = io::read_vector(io::open(path)?).map_err(|e| e.in_file(path))?;
    if v.len() != p {
        return Err(
            Error::Dimension(format!("{name} has length {} but there are {p} features", v.len())).in_file(path),
        );
    }
    Ok(v)
}

fn with_output<F>(out: Option<&Path>, stdout: &mut dyn Write, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let mut file = io::create(path)?;
            write(&mut file)?;
            file.flush().map_err(|e| Error::from(e).in_file(path))
        }
        None => write(stdout),
    }
}

fn fmt_step(s: Option<f64>) -> String {
    s.map_or_else(|| "none".into(), |s| s.to_string())
}

fn cmd_path(args: &PathArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let variant = args.variant.path_variant()?;
    let data = load_data(&args.data)?;
    let p = data.features.ncols();
    let weights = match &args.weights {
        Some(path) => load_vector(path, p, "weights")?,
        None => Array1::zeros(p),
    };
    let direction = match &args.direction {
        Some(path) => load_vector(path, p, "direction")?,
        None => {
            let pred = predict(data.features.view(), weights.view())?;
            let g = aum_subgradient(pred.as_slice().expect("contiguous"), &data.model)?;
            descent_direction(data.features.view(), g.view())?
        }
    };
    let path = line_search(
        weights.view(),
        direction.view(),
        data.features.view(),
        &data.model,
        variant,
        args.max_events,
    )?;
    with_output(args.out.as_deref(), stdout, |w| path.write_csv(w))?;
    writeln!(
        stderr,
        "events={} truncated={} explored_to={} min_aum_step={} max_auc_step={}",
        path.events,
        path.truncated,
        fmt_step(path.explored_to),
        path.choose_step(Objective::MinAum),
        path.choose_step(Objective::MaxAuc),
    )?;
    Ok(())
}

/// Seeded split of `0..n` into (subtrain, validation) index lists, each
/// sorted and non-empty.
pub fn split_indices(n: usize, validation_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "validation fraction must be in (0, 1), got {validation_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 examples to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = ((n as f64 * validation_fraction).round() as usize).clamp(1, n - 1);
    let mut validation = order[..n_val].to_vec();
    let mut subtrain = order[n_val..].to_vec();
    validation.sort_unstable();
    subtrain.sort_unstable();
    Ok((subtrain, validation))
}

fn cmd_train(args: &TrainArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = TrainConfig {
        variant: args.variant.train_variant(),
        aum_tolerance: args.aum_tol,
        max_steps: args.max_steps,
        grid: args.grid.clone().unwrap_or_else(descent::default_grid),
        seed: args.seed,
        init: match args.init {
            InitArg::Zeros => Init::Zeros,
            InitArg::Gaussian => Init::Gaussian(args.init_scale),
        },
        max_events: args.max_events,
        record_time: args.timings,
    };
    config.validate()?;
    let data = load_data(&args.data)?;
    let p = data.features.ncols();
    let (sub_idx, val_idx) = split_indices(data.model.n_examples(), args.validation_fraction, args.seed)?;
    let sub_x = data.features.select(Axis(0), &sub_idx);
    let val_x = data.features.select(Axis(0), &val_idx);
    let sub_model = data.model.subset(&sub_idx)?;
    let val_model = data.model.subset(&val_idx)?;
    let subtrain = Split {
        features: sub_x.view(),
        model: &sub_model,
    };
    let validation = Split {
        features: val_x.view(),
        model: &val_model,
    };
    let weights = match &args.weights {
        Some(path) => load_vector(path, p, "weights")?,
        None => descent::initial_weights(p, config.init, config.seed),
    };
    let (model, log) = descent::train_from(weights, subtrain, Some(validation), &config)?;
    with_output(args.out.as_deref(), stdout, |w| log.write_csv(w))?;
    if let Some(path) = &args.weights_out {
        let mut file = io::create(path)?;
        io::write_vector(&mut file, model.weights.view()).map_err(|e| e.in_file(path))?;
    }
    let last = log.steps.last().expect("log has the initial row");
    let (best_step, best_auc) = log.max_validation_auc().expect("validation is always evaluated");
    writeln!(
        stderr,
        "gradient_steps={} final_aum_subtrain={} max_auc_validation={} at_step={}{}",
        log.gradient_steps(),
        last.aum_subtrain,
        best_auc,
        best_step,
        if log.stationary_start { " stationary_start" } else { "" },
    )?;
    Ok(())
}

fn cmd_oracle(args: &OracleArgs, stdout: &mut dyn Write) -> Result<()> {
    let data = load_data(&args.data)?;
    let p = data.features.ncols();
    let weights = load_vector(&args.weights, p, "weights")?;
    let direction = load_vector(&args.direction, p, "direction")?;
    let points = grid_evaluate(
        weights.view(),
        direction.view(),
        data.features.view(),
        &data.model,
        &args.steps,
    )?;
    with_output(args.out.as_deref(), stdout, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "aum", "auc"])?;
        for g in &points {
            out.write_record([g.step.to_string(), g.aum.to_string(), g.auc.to_string()])?;
        }
        out.flush()?;
        Ok(())
    })
}

fn cmd_synth(args: &SynthArgs, stderr: &mut dyn Write) -> Result<()> {
    std::fs::create_dir_all(&args.out).map_err(|e| Error::from(e).in_file(&args.out))?;
    let ids = io::numbered_ids(args.n);
    let features_path = args.out.join("features.csv");
    let (features, target_path) = match args.kind {
        SynthKind::Binary => {
            let classes = match args.margin {
                Some(margin) => Classes::Separable { margin },
                None => Classes::Overlapping {
                    separation: args.separation,
                },
            };
            let d = synth::binary_unbalanced(args.n, args.p, args.imbalance, classes, args.seed)?;
            let path = args.out.join("labels.csv");
            io::write_labels(io::create(&path)?, &ids, &d.labels)?;
            (d.features, path)
        }
        SynthKind::Changepoint => {
            let d = synth::changepoint_nonmono(args.n, args.p, args.seed)?;
            let path = args.out.join("breakpoints.csv");
            io::write_breakpoints(io::create(&path)?, &ids, &d.model)?;
            (d.features, path)
        }
    };
    io::write_features(io::create(&features_path)?, &ids, features.view())?;
    writeln!(
        stderr,
        "wrote {} and {}",
        features_path.display(),
        target_path.display()
    )?;
    Ok(())
}

/// One row of the scaling benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub seed: u64,
    pub variant: VariantArg,
    pub mean_events_per_step: f64,
    pub gradient_steps: usize,
    pub elapsed_ns: Option<u128>,
}

/// Trains every `(n, seed, variant)` cell on its own synthetic binary data
/// set, in parallel. Rows come back sorted by `n`, seed, then the order of
/// `variants`.
pub fn bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    if args.sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("--sizes must be ascending".into()));
    }
    if args.variants.contains(&VariantArg::MaxAucValidation) {
        return Err(Error::InvalidArgument(
            "bench trains without a validation set; max-auc-validation is not available".into(),
        ));
    }
    let cells: Vec<(usize, u64, usize)> = args
        .sizes
        .iter()
        .flat_map(|&n| {
            args.seeds
                .iter()
                .flat_map(move |&seed| (0..args.variants.len()).map(move |v| (n, seed, v)))
        })
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(n, seed, v)| {
            let variant = args.variants[v];
            let classes = Classes::Overlapping {
                separation: args.separation,
            };
            let data = synth::binary_unbalanced(n, args.p, args.imbalance, classes, seed)?;
            let model = data.error_model()?;
            let config = TrainConfig {
                variant: variant.train_variant(),
                aum_tolerance: args.aum_tol,
                max_steps: args.max_steps,
                seed,
                ..TrainConfig::default()
            };
            let split = Split {
                features: data.features.view(),
                model: &model,
            };
            let start = Instant::now();
            let (_, log) = descent::train(split, None, &config)?;
            let elapsed = start.elapsed().as_nanos();
            Ok((
                v,
                BenchRow {
                    n,
                    seed,
                    variant,
                    mean_events_per_step: log.mean_events_per_step(),
                    gradient_steps: log.gradient_steps(),
                    elapsed_ns: args.timings.then_some(elapsed),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(v, r)| (r.n, r.seed, *v));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<()> {
    let rows = bench(args)?;
    with_output(args.out.as_deref(), stdout, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "n",
            "seed",
            "variant",
            "mean_events_per_step",
            "gradient_steps",
            "elapsed_ns",
            "max_intersections",
        ])?;
        for r in &rows {
            out.write_record([
                r.n.to_string(),
                r.seed.to_string(),
                r.variant.name().to_owned(),
                r.mean_events_per_step.to_string(),
                r.gradient_steps.to_string(),
                r.elapsed_ns.map(|t| t.to_string()).unwrap_or_default(),
                (r.n * r.n.saturating_sub(1) / 2).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    })
}
