//! Piecewise-constant per-example error functions.
//!
//! Every labeled example contributes a false positive rate `FP_i` and a false
//! negative rate `FN_i` that are step functions of its predicted value. A step
//! is a [`Breakpoint`]: at predicted value `value` the rates jump by
//! `delta_fp` and `delta_fn`. Rates are stored in rate units, so across all
//! examples the false positive deltas sum to 1 and the false negative deltas
//! sum to -1.

use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};

/// Absolute tolerance used by every invariant check in this module.
pub const RATE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakpoint {
    /// Predicted value at which the error rates jump.
    pub value: f64,
    pub delta_fp: f64,
    pub delta_fn: f64,
    /// Zero-based example index.
    pub example: usize,
}

impl Breakpoint {
    pub fn new(value: f64, delta_fp: f64, delta_fn: f64, example: usize) -> Self {
        Breakpoint {
            value,
            delta_fp,
            delta_fn,
            example,
        }
    }
}

/// Validated collection of breakpoints over `n_examples` examples.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorModel {
    breakpoints: Vec<Breakpoint>,
    n_examples: usize,
    total_fp: f64,
    total_fn: f64,
}

/// Dense example index assignment for external example ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExampleIds {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl ExampleIds {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `id`, assigning the next free one if unseen.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }
}

impl FromIterator<String> for ExampleIds {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        let mut ids = ExampleIds::new();
        for id in iter {
            ids.intern(&id);
        }
        ids
    }
}

impl ErrorModel {
    /// Validates and wraps `breakpoints`.
    ///
    /// Checks that every field is finite, that no breakpoint is a no-op, that
    /// every example in `0..n_examples` is referenced, that each example's
    /// rates stay inside `[0, 1]` when swept by increasing predicted value, and
    /// that the global totals are 1 (false positives) and -1 (false
    /// negatives).
    pub fn new(breakpoints: Vec<Breakpoint>, n_examples: usize) -> Result<Self> {
        let model = Self::unchecked(breakpoints, n_examples)?;
        model.check_totals()?;
        Ok(model)
    }

    /// Like [`ErrorModel::new`] but skips the global-total check; used for raw
    /// counts that are subsequently passed to [`ErrorModel::normalize`].
    pub fn raw(breakpoints: Vec<Breakpoint>, n_examples: usize) -> Result<Self> {
        Self::unchecked(breakpoints, n_examples)
    }

    fn unchecked(breakpoints: Vec<Breakpoint>, n_examples: usize) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::NoBreakpoints);
        }
        let mut seen = vec![false; n_examples];
        for (b, bp) in breakpoints.iter().enumerate() {
            if !(bp.value.is_finite() && bp.delta_fp.is_finite() && bp.delta_fn.is_finite()) {
                return Err(Error::Validation(format!("breakpoint {b} has a non-finite field")));
            }
            if bp.delta_fp == 0.0 && bp.delta_fn == 0.0 {
                return Err(Error::Validation(format!(
                    "breakpoint {b} has zero delta_fp and delta_fn"
                )));
            }
            if bp.example >= n_examples {
                return Err(Error::Validation(format!(
                    "breakpoint {b} references example {} but there are only {n_examples}",
                    bp.example
                )));
            }
            seen[bp.example] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("example {i} has no breakpoints")));
        }
        let total_fp = breakpoints.iter().map(|b| b.delta_fp).sum();
        let total_fn = breakpoints.iter().map(|b| b.delta_fn).sum();
        Ok(ErrorModel {
            breakpoints,
            n_examples,
            total_fp,
            total_fn,
        })
    }

    fn check_totals(&self) -> Result<()> {
        if (self.total_fp - 1.0).abs() > RATE_TOLERANCE {
            return Err(Error::Validation(format!(
                "total_fp = {} (sum of delta_fp must be 1)",
                self.total_fp
            )));
        }
        if (self.total_fn + 1.0).abs() > RATE_TOLERANCE {
            return Err(Error::Validation(format!(
                "total_fn = {} (sum of delta_fn must be -1)",
                self.total_fn
            )));
        }
        self.check_example_rates()
    }

    fn check_example_rates(&self) -> Result<()> {
        let mut per_example: Vec<Vec<&Breakpoint>> = vec![Vec::new(); self.n_examples];
        for bp in &self.breakpoints {
            per_example[bp.example].push(bp);
        }
        for (i, bps) in per_example.iter_mut().enumerate() {
            bps.sort_by(|a, b| a.value.total_cmp(&b.value));
            let mut fp = 0.0;
            let mut fn_ = -bps.iter().map(|b| b.delta_fn).sum::<f64>();
            let in_range = |x: f64| (-RATE_TOLERANCE..=1.0 + RATE_TOLERANCE).contains(&x);
            if !in_range(fn_) {
                return Err(Error::Validation(format!(
                    "example {i}: FN at -inf is {fn_}, outside [0, 1]"
                )));
            }
            let mut k = 0;
            while k < bps.len() {
                // equal values jump together
                let v = bps[k].value;
                while k < bps.len() && bps[k].value == v {
                    fp += bps[k].delta_fp;
                    fn_ += bps[k].delta_fn;
                    k += 1;
                }
                if !in_range(fp) || !in_range(fn_) {
                    return Err(Error::Validation(format!(
                        "example {i}: rates (FP={fp}, FN={fn_}) leave [0, 1] after value {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Breakpoints for a binary problem. A positive example gets a single
    /// breakpoint `(0, 0, -1/n_pos)` and a negative one `(0, 1/n_neg, 0)`.
    pub fn binary(labels: &[i8]) -> Result<Self> {
        let n_pos = labels.iter().filter(|&&y| y == 1).count();
        let n_neg = labels.iter().filter(|&&y| y == -1).count();
        if n_pos + n_neg != labels.len() {
            return Err(Error::Validation("labels must be -1 or 1".into()));
        }
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::DegenerateLabels);
        }
        let breakpoints = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                if y == 1 {
                    Breakpoint::new(0.0, 0.0, -1.0 / n_pos as f64, i)
                } else {
                    Breakpoint::new(0.0, 1.0 / n_neg as f64, 0.0, i)
                }
            })
            .collect();
        ErrorModel::new(breakpoints, labels.len())
    }

    /// Rescales raw deltas so the totals become 1 and -1.
    pub fn normalize(&self) -> Result<Self> {
        if !(self.total_fp > 0.0) || !(self.total_fn < 0.0) {
            return Err(Error::Validation(format!(
                "cannot normalize: total_fp = {}, total_fn = {}",
                self.total_fp, self.total_fn
            )));
        }
        let fp_scale = 1.0 / self.total_fp;
        let fn_scale = -1.0 / self.total_fn;
        let breakpoints = self
            .breakpoints
            .iter()
            .map(|b| Breakpoint {
                delta_fp: b.delta_fp * fp_scale,
                delta_fn: b.delta_fn * fn_scale,
                ..*b
            })
            .collect();
        ErrorModel::new(breakpoints, self.n_examples)
    }

    /// Breakpoints of the given examples only, re-indexed in the order of
    /// `examples` and renormalized so the subset's totals are 1 and -1.
    pub fn subset(&self, examples: &[usize]) -> Result<Self> {
        let mut new_index = vec![None; self.n_examples];
        for (k, &i) in examples.iter().enumerate() {
            if i >= self.n_examples {
                return Err(Error::Dimension(format!(
                    "example {i} out of range for {} examples",
                    self.n_examples
                )));
            }
            if new_index[i].replace(k).is_some() {
                return Err(Error::InvalidArgument(format!("example {i} selected twice")));
            }
        }
        let breakpoints = self
            .breakpoints
            .iter()
            .filter_map(|b| new_index[b.example].map(|k| Breakpoint { example: k, ..*b }))
            .collect();
        ErrorModel::raw(breakpoints, examples.len())?.normalize()
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn n_examples(&self) -> usize {
        self.n_examples
    }

    pub fn total_fp(&self) -> f64 {
        self.total_fp
    }

    pub fn total_fn(&self) -> f64 {
        self.total_fn
    }

    /// True when some example's FP or FN is not monotone in the predicted
    /// value; only such models can produce ROC loops and AUC outside [0, 1].
    pub fn has_non_monotone_example(&self) -> bool {
        let mut fp_sign = vec![0i8; self.n_examples];
        let mut fn_sign = vec![0i8; self.n_examples];
        let mixed = |signs: &mut [i8], i: usize, d: f64| {
            let s = if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                return false;
            };
            if signs[i] == 0 {
                signs[i] = s;
                false
            } else {
                signs[i] != s
            }
        };
        self.breakpoints
            .iter()
            .any(|b| mixed(&mut fp_sign, b.example, b.delta_fp) | mixed(&mut fn_sign, b.example, b.delta_fn))
    }
}

/// Shorthand for [`ErrorModel::binary`].
pub fn binary_breakpoints(labels: &[i8]) -> Result<ErrorModel> {
    ErrorModel::binary(labels)
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::parse(0, format!("missing column `{name}` in header")))
}

fn parse_real(record: &csv::StringRecord, col: usize, row: usize, name: &str) -> Result<f64> {
    let raw = record
        .get(col)
        .ok_or_else(|| Error::parse(row, format!("missing field `{name}`")))?
        .trim();
    let x: f64 = raw
        .parse()
        .map_err(|_| Error::parse(row, format!("`{name}` = {raw:?} is not a number")))?;
    if !x.is_finite() {
        return Err(Error::parse(row, format!("`{name}` = {raw:?} is not finite")));
    }
    Ok(x)
}

/// Reads `example_id,value,delta_fp,delta_fn` rows.
///
/// Example ids are mapped through `ids`: when `fixed` is true an unknown id is
/// an error (used to align breakpoints with a features file), otherwise new
/// ids are assigned dense indices in order of first appearance. Row numbers in
/// errors count data rows from 1.
pub fn load_breakpoints<R: Read>(source: R, ids: &mut ExampleIds, fixed: bool) -> Result<ErrorModel> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let cols = [
        header_index(&headers, "example_id")?,
        header_index(&headers, "value")?,
        header_index(&headers, "delta_fp")?,
        header_index(&headers, "delta_fn")?,
    ];
    let mut breakpoints = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::parse(row, e.to_string()))?;
        let id = record
            .get(cols[0])
            .ok_or_else(|| Error::parse(row, "missing field `example_id`"))?;
        let example = if fixed {
            ids.get(id)
                .ok_or_else(|| Error::parse(row, format!("unknown example_id {id:?}")))?
        } else {
            ids.intern(id)
        };
        breakpoints.push(Breakpoint {
            value: parse_real(&record, cols[1], row, "value")?,
            delta_fp: parse_real(&record, cols[2], row, "delta_fp")?,
            delta_fn: parse_real(&record, cols[3], row, "delta_fn")?,
            example,
        });
    }
    ErrorModel::new(breakpoints, ids.len())
}

/// Reads `example_id,label` rows with labels in {-1, 1}, returning labels in
/// index order of `ids` (same id mapping rules as [`load_breakpoints`]).
pub fn load_labels<R: Read>(source: R, ids: &mut ExampleIds, fixed: bool) -> Result<Vec<i8>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let id_col = header_index(&headers, "example_id")?;
    let label_col = header_index(&headers, "label")?;
    let mut labels: Vec<Option<i8>> = vec![None; ids.len()];
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::parse(row, e.to_string()))?;
        let id = record.get(id_col).unwrap_or_default();
        let i = if fixed {
            ids.get(id)
                .ok_or_else(|| Error::parse(row, format!("unknown example_id {id:?}")))?
        } else {
            ids.intern(id)
        };
        let raw = record.get(label_col).unwrap_or_default();
        let y = match raw.parse::<f64>() {
            Ok(1.0) => 1,
            Ok(-1.0) => -1,
            _ => return Err(Error::parse(row, format!("label {raw:?} is not -1 or 1"))),
        };
        if labels.len() <= i {
            labels.resize(i + 1, None);
        }
        if labels[i].replace(y).is_some() {
            return Err(Error::parse(row, format!("duplicate example_id {id:?}")));
        }
    }
    if labels.is_empty() {
        return Err(Error::NoBreakpoints);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(i, y)| y.ok_or_else(|| Error::Validation(format!("no label for example {:?}", ids.id(i)))))
        .collect()
}
