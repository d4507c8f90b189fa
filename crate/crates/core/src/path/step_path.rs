use std::io::{Read, Write};

use crate::error::{Error, Result};

/// AUM and AUC on one stretch of step sizes between consecutive events.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub step_lo: f64,
    /// `None` on a final segment that extends to infinity.
    pub step_hi: Option<f64>,
    pub aum_at_lo: f64,
    pub aum_slope: f64,
    /// AUC exactly at `step_lo`.
    pub auc_at_lo_event: f64,
    /// AUC on the open interval `(step_lo, step_hi)`.
    pub auc_on_interval: f64,
}

impl Segment {
    pub fn aum_at(&self, step: f64) -> f64 {
        self.aum_at_lo + self.aum_slope * (step - self.step_lo)
    }

    /// Step used to stand for the open interval: its midpoint, or one past
    /// `step_lo` when unbounded.
    pub fn representative_step(&self) -> f64 {
        match self.step_hi {
            Some(hi) => (self.step_lo + hi) / 2.0,
            None => self.step_lo + 1.0,
        }
    }
}

/// Exact AUM and AUC as functions of the step size, from zero up to
/// `explored_to` (or everywhere when that is `None`).
#[derive(Clone, Debug, PartialEq)]
pub struct StepPath {
    pub segments: Vec<Segment>,
    /// Step of the first event not processed, if any remain.
    pub explored_to: Option<f64>,
    /// The event budget ran out before the stopping rule was met.
    pub truncated: bool,
    /// Number of event step sizes processed.
    pub events: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    MinAum,
    MaxAuc,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathValue {
    pub aum: f64,
    pub auc: f64,
}

const CSV_HEADER: [&str; 7] = [
    "k",
    "step_lo",
    "step_hi",
    "aum_at_lo",
    "aum_slope",
    "auc_at_lo_event",
    "auc_on_interval",
];

impl StepPath {
    /// AUM and AUC at step size `step`. At an event step the AUC is the
    /// value exactly there, where the meeting thresholds coincide.
    pub fn query(&self, step: f64) -> Result<PathValue> {
        if !(step >= 0.0) {
            return Err(Error::InvalidArgument(format!("step size {step} must be >= 0")));
        }
        if self.explored_to.is_some_and(|e| step >= e) {
            return Err(Error::OutsideExploredRange(step));
        }
        let k = self.segments.partition_point(|s| s.step_lo <= step);
        let seg = k
            .checked_sub(1)
            .and_then(|k| self.segments.get(k))
            .ok_or_else(|| Error::Internal("step path has no segments".into()))?;
        let auc = if step == seg.step_lo {
            seg.auc_at_lo_event
        } else {
            seg.auc_on_interval
        };
        Ok(PathValue {
            aum: seg.aum_at(step),
            auc,
        })
    }

    /// AUM at `step`. Unlike [`StepPath::query`] this also accepts
    /// `explored_to` itself, since AUM is continuous there.
    pub fn aum(&self, step: f64) -> Result<f64> {
        match self.explored_to {
            Some(e) if step == e => Ok(self.segments.last().expect("non-empty").aum_at(e)),
            _ => self.query(step).map(|v| v.aum),
        }
    }

    /// Step size that is best for `objective` on the explored path; ties go
    /// to the smaller step.
    ///
    /// For [`Objective::MinAum`] the minimum of a piecewise linear function
    /// is at a segment boundary (possibly `explored_to`). For
    /// [`Objective::MaxAuc`] each event step and each open interval is a
    /// candidate; an interval is represented by
    /// [`Segment::representative_step`].
    pub fn choose_step(&self, objective: Objective) -> f64 {
        let Some(last) = self.segments.last() else {
            return 0.0;
        };
        match objective {
            Objective::MinAum => {
                let ends = self
                    .segments
                    .iter()
                    .map(|s| (s.step_lo, s.aum_at_lo))
                    .chain(self.explored_to.map(|e| (e, last.aum_at(e))));
                let mut best: Option<(f64, f64)> = None;
                for (step, aum) in ends {
                    if best.is_none_or(|(_, b)| aum < b - 1e-12 * (1.0 + b.abs())) {
                        best = Some((step, aum));
                    }
                }
                best.map_or(0.0, |b| b.0)
            }
            Objective::MaxAuc => {
                let mut best = (0.0, f64::NEG_INFINITY);
                for s in &self.segments {
                    for (step, auc) in [
                        (s.step_lo, s.auc_at_lo_event),
                        (s.representative_step(), s.auc_on_interval),
                    ] {
                        if auc > best.1 + 1e-12 {
                            best = (step, auc);
                        }
                    }
                }
                best.0
            }
        }
    }

    /// Writes one row per segment; `k` counts from 1 and `step_hi` is empty
    /// on an unbounded final segment.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(CSV_HEADER)?;
        for (k, s) in self.segments.iter().enumerate() {
            out.write_record([
                (k + 1).to_string(),
                s.step_lo.to_string(),
                s.step_hi.map(|h| h.to_string()).unwrap_or_default(),
                s.aum_at_lo.to_string(),
                s.aum_slope.to_string(),
                s.auc_at_lo_event.to_string(),
                s.auc_on_interval.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads segments written by [`StepPath::write_csv`]. The path counts as
    /// explored up to the last `step_hi`, and is not marked truncated.
    pub fn read_csv<R: Read>(reader: R) -> Result<StepPath> {
        let mut input = csv::Reader::from_reader(reader);
        let header = input.headers()?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::parse(1, format!("expected header {}", CSV_HEADER.join(","))));
        }
        let mut segments = Vec::new();
        for (i, record) in input.records().enumerate() {
            let row = i + 2;
            let record = record?;
            let field = |c: usize| -> Result<f64> {
                let text = record.get(c).unwrap_or("");
                text.parse::<f64>()
                    .map_err(|_| Error::parse(row, format!("bad {} '{text}'", CSV_HEADER[c])))
            };
            let step_hi = match record.get(2) {
                Some("") | None => None,
                Some(_) => Some(field(2)?),
            };
            segments.push(Segment {
                step_lo: field(1)?,
                step_hi,
                aum_at_lo: field(3)?,
                aum_slope: field(4)?,
                auc_at_lo_event: field(5)?,
                auc_on_interval: field(6)?,
            });
        }
        if segments.is_empty() {
            return Err(Error::parse(1, "step path has no segments"));
        }
        Ok(StepPath {
            explored_to: segments.last().and_then(|s| s.step_hi),
            events: segments.len() - 1,
            truncated: false,
            segments,
        })
    }
}
