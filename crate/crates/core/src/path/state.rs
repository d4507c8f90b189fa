//! Mutable state of the step-size sweep.
//!
//! Lines are kept sorted by threshold. Interval `k` (for `k` in `0..=L`) lies
//! between the lines at positions `k - 1` and `k`; `fp[k]`, `fn_[k]` and
//! `min[k]` are the error rates on it. `min[0]` and `min[L]` are always zero
//! because FP starts at zero and FN ends at zero.
//!
//! With these vectors the AUM on the current segment is a linear function of
//! the step size with slope
//!
//! ```text
//! D = sum_{k=1}^{L-1} (slope[q_k] - slope[q_{k-1}]) * min[k]
//! ```
//!
//! and swapping two adjacent lines changes exactly one interval, so `D` and
//! the AUC can be updated in constant time.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::error_model::ErrorModel;

use super::lines::ThresholdLine;
use super::queue::{step_tolerance, IntervalQueue};

/// Threshold lines that coincide for every step size act as one line.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SweepLine {
    pub intercept: f64,
    pub slope: f64,
    pub delta_fp: f64,
    pub delta_fn: f64,
    /// Breakpoint indices of the merged lines, ascending.
    pub breakpoints: Vec<usize>,
}

impl SweepLine {
    fn at(&self, step: f64) -> f64 {
        self.intercept + self.slope * step
    }
}

/// Lines meeting at one `(step, threshold)`; `members` are the consecutive
/// positions they occupy just before the step.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionEvent {
    pub step: f64,
    pub threshold: f64,
    pub members: Vec<usize>,
}

/// What changed when the sweep passed one step size.
#[derive(Clone, Debug, PartialEq)]
pub struct EventOutcome {
    pub step: f64,
    pub events: Vec<IntersectionEvent>,
    /// AUM exactly at `step`.
    pub aum: f64,
    pub slope_before: f64,
    pub slope_after: f64,
    pub auc_before: f64,
    /// AUC exactly at `step`, where the meeting lines share one ROC point.
    pub auc_at: f64,
    pub auc_after: f64,
}

fn trapezoid(lo: (f64, f64), hi: (f64, f64)) -> f64 {
    // points are (fp, fn); tp = 1 - fn
    (hi.0 - lo.0) * ((1.0 - hi.1) + (1.0 - lo.1)) / 2.0
}

#[derive(Clone, Debug)]
pub struct PathState {
    lines: Vec<SweepLine>,
    /// position -> line
    perm: Vec<usize>,
    /// line -> position
    pos: Vec<usize>,
    fp: Vec<f64>,
    fn_: Vec<f64>,
    min: Vec<f64>,
    aum: f64,
    slope: f64,
    auc_after: f64,
    auc_at_start: f64,
    step: f64,
    queue: IntervalQueue,
    n_breakpoints: usize,
    steps_processed: usize,
    crossings: usize,
}

impl PathState {
    /// Sorts the lines just after step size zero and computes the error
    /// rates, AUM, AUM slope and AUC there, then queues every adjacent pair
    /// that meets at a positive step size.
    ///
    /// Ties at zero are broken by slope (then breakpoint index), which is
    /// the order the lines take for small positive steps.
    pub fn init(lines: &[ThresholdLine], model: &ErrorModel) -> Result<Self> {
        if lines.len() < 2 {
            return Err(Error::DegenerateInstance(format!(
                "need at least 2 breakpoints, got {}",
                lines.len()
            )));
        }
        let bps = model.breakpoints();
        if let Some(l) = lines.iter().find(|l| l.breakpoint >= bps.len()) {
            return Err(Error::Dimension(format!(
                "line references breakpoint {} but the model has {}",
                l.breakpoint,
                bps.len()
            )));
        }
        let mut order: Vec<&ThresholdLine> = lines.iter().collect();
        order.sort_by(|a, b| {
            a.intercept
                .total_cmp(&b.intercept)
                .then(a.slope.total_cmp(&b.slope))
                .then(a.breakpoint.cmp(&b.breakpoint))
        });
        let mut merged: Vec<SweepLine> = Vec::with_capacity(order.len());
        for line in order {
            let bp = &bps[line.breakpoint];
            match merged.last_mut() {
                Some(last) if last.intercept == line.intercept && last.slope == line.slope => {
                    last.delta_fp += bp.delta_fp;
                    last.delta_fn += bp.delta_fn;
                    last.breakpoints.push(line.breakpoint);
                }
                _ => merged.push(SweepLine {
                    intercept: line.intercept,
                    slope: line.slope,
                    delta_fp: bp.delta_fp,
                    delta_fn: bp.delta_fn,
                    breakpoints: vec![line.breakpoint],
                }),
            }
        }
        let n = merged.len();
        let mut fp = vec![0.0; n + 1];
        let mut fn_ = vec![0.0; n + 1];
        fn_[0] = -merged.iter().map(|l| l.delta_fn).sum::<f64>();
        for k in 0..n {
            fp[k + 1] = fp[k] + merged[k].delta_fp;
            fn_[k + 1] = fn_[k] + merged[k].delta_fn;
        }
        let mut min: Vec<f64> = fp.iter().zip(&fn_).map(|(a, b)| a.min(*b)).collect();
        min[0] = 0.0;
        min[n] = 0.0;

        let aum = (1..n)
            .map(|k| (merged[k].intercept - merged[k - 1].intercept) * min[k])
            .sum();
        let slope = (1..n).map(|k| (merged[k].slope - merged[k - 1].slope) * min[k]).sum();
        let point = |k: usize| (fp[k], fn_[k]);
        let auc_after = (0..n).map(|k| trapezoid(point(k), point(k + 1))).sum();
        // exactly at zero, lines with equal intercepts share one ROC point
        let mut auc_at_start = 0.0;
        let mut last_kept = 0;
        for k in 1..=n {
            if k == n || merged[k - 1].intercept != merged[k].intercept {
                auc_at_start += trapezoid(point(last_kept), point(k));
                last_kept = k;
            }
        }

        let mut state = PathState {
            perm: (0..n).collect(),
            pos: (0..n).collect(),
            lines: merged,
            fp,
            fn_,
            min,
            aum,
            slope,
            auc_after,
            auc_at_start,
            step: 0.0,
            queue: IntervalQueue::new(),
            n_breakpoints: lines.len(),
            steps_processed: 0,
            crossings: 0,
        };
        for k in 1..n {
            let (left, right) = (state.perm[k - 1], state.perm[k]);
            if let Some((s, t)) = state.crossing(left, right) {
                state.queue.insert(s, t, left, right);
            }
        }
        Ok(state)
    }

    /// Where `left` (currently below) and `right` meet, if `left` rises
    /// faster and so will overtake `right`.
    fn crossing(&self, left: usize, right: usize) -> Option<(f64, f64)> {
        let (a, b) = (&self.lines[left], &self.lines[right]);
        if a.slope <= b.slope {
            return None;
        }
        let step = (b.intercept - a.intercept) / (a.slope - b.slope);
        step.is_finite().then(|| (step, a.at(step)))
    }

    /// Queues the crossing of a newly adjacent pair, or collects it in
    /// `cascade` when it falls within rounding of the current step.
    fn schedule(&mut self, left: usize, right: usize, cascade: &mut Vec<(usize, usize)>) {
        if let Some((s, t)) = self.crossing(left, right) {
            if s <= self.step + step_tolerance(self.step) {
                cascade.push((left, right));
            } else {
                self.queue.insert(s, t, left, right);
            }
        }
    }

    /// Groups still-adjacent crossing pairs into maximal runs of positions.
    fn blocks_from_pairs(&self, pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<(usize, usize)> {
        let mut starts: Vec<usize> = pairs
            .into_iter()
            .filter(|&(a, b)| self.pos[b] == self.pos[a] + 1 && self.lines[a].slope > self.lines[b].slope)
            .map(|(a, _)| self.pos[a])
            .collect();
        starts.sort_unstable();
        starts.dedup();
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        for p in starts {
            match blocks.last_mut() {
                Some(last) if last.1 == p => last.1 = p + 1,
                _ => blocks.push((p, p + 1)),
            }
        }
        blocks
    }

    /// Swaps the lines at positions `j` and `j + 1`; only interval `j + 1`
    /// changes.
    fn swap_adjacent(&mut self, j: usize) {
        let k = j + 1;
        let (a, b) = (self.perm[j], self.perm[k]);
        let (la, lb) = (&self.lines[a], &self.lines[b]);
        let fp_new = self.fp[k] + (lb.delta_fp - la.delta_fp);
        let fn_new = self.fn_[k] + (lb.delta_fn - la.delta_fn);
        let min_new = fp_new.min(fn_new);
        // min[k + 1] is the virtual zero when k + 1 == L
        self.slope += (lb.slope - la.slope) * (self.min[k + 1] + self.min[k - 1] - self.min[k] - min_new);
        self.fp[k] = fp_new;
        self.fn_[k] = fn_new;
        self.min[k] = min_new;
        self.perm.swap(j, k);
        self.pos[a] = k;
        self.pos[b] = j;
        self.crossings += 1;
    }

    fn slope_term(&self, k: usize) -> f64 {
        (self.lines[self.perm[k]].slope - self.lines[self.perm[k - 1]].slope) * self.min[k]
    }

    /// Reverses positions `l..=r`, for three or more lines through one
    /// point. Intervals `l + 1..=r` are rebuilt from interval `l` and the
    /// slope terms touching the block are recomputed.
    fn reverse_block(&mut self, l: usize, r: usize) {
        let n = self.lines.len();
        let terms = l.max(1)..=(r + 1).min(n - 1);
        let before: f64 = terms.clone().map(|k| self.slope_term(k)).sum();
        self.perm[l..=r].reverse();
        for p in l..=r {
            self.pos[self.perm[p]] = p;
        }
        for k in l + 1..=r {
            let line = &self.lines[self.perm[k - 1]];
            self.fp[k] = self.fp[k - 1] + line.delta_fp;
            self.fn_[k] = self.fn_[k - 1] + line.delta_fn;
            self.min[k] = self.fp[k].min(self.fn_[k]);
        }
        let after: f64 = terms.map(|k| self.slope_term(k)).sum();
        self.slope += after - before;
        let m = r - l + 1;
        self.crossings += m * (m - 1) / 2;
    }

    /// Moves the sweep to `step` and reorders every block in `blocks`.
    ///
    /// New adjacent pairs that meet within rounding of `step` are reordered
    /// in the same call, so the permutation is valid just after `step`.
    fn process_step(&mut self, step: f64, mut blocks: Vec<(usize, usize)>) -> Result<EventOutcome> {
        let n = self.lines.len();
        let slope_before = self.slope;
        let auc_before = self.auc_after;
        self.aum += self.slope * (step - self.step);
        self.step = step;

        let mut snapshot: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        let mut windows: Vec<(usize, usize)> = Vec::new();
        let mut events = Vec::new();
        while !blocks.is_empty() {
            for &(l, r) in &blocks {
                events.push(IntersectionEvent {
                    step,
                    threshold: self.lines[self.perm[l]].at(step),
                    members: (l..=r).collect(),
                });
                for k in l..=r + 1 {
                    snapshot.entry(k).or_insert((self.fp[k], self.fn_[k]));
                }
                windows.push((l, r));
                if r == l + 1 {
                    self.swap_adjacent(l);
                } else {
                    self.reverse_block(l, r);
                }
            }
            let mut cascade = Vec::new();
            for &(l, r) in &blocks {
                if l > 0 {
                    self.schedule(self.perm[l - 1], self.perm[l], &mut cascade);
                }
                if r + 1 < n {
                    self.schedule(self.perm[r], self.perm[r + 1], &mut cascade);
                }
            }
            blocks = self.blocks_from_pairs(cascade);
        }
        self.steps_processed += 1;

        // Each window of touched positions loses its interior ROC points at
        // `step` (a diagonal joins its end points) and gets new ones after.
        windows.sort_unstable();
        let mut merged: Vec<(usize, usize)> = Vec::new();
        for (l, r) in windows {
            match merged.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(r),
                _ => merged.push((l, r)),
            }
        }
        let mut auc_at = auc_before;
        let mut auc_after = auc_before;
        for (l, r) in merged {
            let pre = |k: usize| snapshot[&k];
            let removed: f64 = (l..=r).map(|k| trapezoid(pre(k), pre(k + 1))).sum();
            let added: f64 = (l..=r)
                .map(|k| trapezoid((self.fp[k], self.fn_[k]), (self.fp[k + 1], self.fn_[k + 1])))
                .sum();
            auc_at += trapezoid(pre(l), pre(r + 1)) - removed;
            auc_after += added - removed;
        }
        self.auc_after = auc_after;

        Ok(EventOutcome {
            step,
            events,
            aum: self.aum,
            slope_before,
            slope_after: self.slope,
            auc_before,
            auc_at,
            auc_after,
        })
    }

    /// Applies one externally supplied intersection.
    pub fn apply_event(&mut self, event: &IntersectionEvent) -> Result<EventOutcome> {
        if !(event.step > self.step) {
            return Err(Error::Internal(format!(
                "event at step {} is not after the current step {}",
                event.step, self.step
            )));
        }
        let members = &event.members;
        let valid = members.len() >= 2
            && members.windows(2).all(|w| w[1] == w[0] + 1)
            && *members.last().unwrap() < self.lines.len()
            && members
                .windows(2)
                .all(|w| self.lines[self.perm[w[0]]].slope > self.lines[self.perm[w[1]]].slope);
        if !valid {
            return Err(Error::Internal(format!(
                "event members {members:?} are not adjacent crossing lines"
            )));
        }
        self.process_step(event.step, vec![(members[0], *members.last().unwrap())])
    }

    /// Processes the next step size at which lines meet, discarding queued
    /// pairs that are no longer adjacent. Returns `None` once no line will
    /// overtake another.
    pub fn advance(&mut self) -> Result<Option<EventOutcome>> {
        while let Some((step, column)) = self.queue.pop_first() {
            let blocks = self.blocks_from_pairs(column.pairs());
            if blocks.is_empty() {
                continue;
            }
            if !(step > self.step) {
                return Err(Error::Internal(format!(
                    "queued step {step} is not after the current step {}",
                    self.step
                )));
            }
            return self.process_step(step, blocks).map(Some);
        }
        Ok(None)
    }

    /// Step size of the next valid event, dropping stale queue columns.
    pub fn peek_next_step(&mut self) -> Option<f64> {
        loop {
            let (step, column) = self.queue.first()?;
            if !self.blocks_from_pairs(column.pairs()).is_empty() {
                return Some(step);
            }
            self.queue.pop_first();
        }
    }

    /// Pending valid pairs per step size, with each line named by its first
    /// breakpoint index (left line first).
    pub fn pending_pairs(&self) -> Vec<(f64, Vec<(usize, usize)>)> {
        self.queue
            .iter()
            .filter_map(|(step, column)| {
                let pairs: Vec<_> = column
                    .pairs()
                    .filter(|&(a, b)| self.pos[b] == self.pos[a] + 1)
                    .map(|(a, b)| (self.lines[a].breakpoints[0], self.lines[b].breakpoints[0]))
                    .collect();
                (!pairs.is_empty()).then_some((step, pairs))
            })
            .collect()
    }

    /// True when the current order sorts the lines at `step`, up to a
    /// relative tolerance.
    pub fn is_sorted_at(&self, step: f64, tolerance: f64) -> bool {
        self.perm.windows(2).all(|w| {
            let (a, b) = (self.lines[w[0]].at(step), self.lines[w[1]].at(step));
            a <= b + tolerance * a.abs().max(b.abs()).max(1.0)
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// AUM at the current step.
    pub fn aum(&self) -> f64 {
        self.aum
    }

    /// AUM slope just after the current step.
    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// AUC just after the current step.
    pub fn auc_after(&self) -> f64 {
        self.auc_after
    }

    /// AUC exactly at step size zero.
    pub fn auc_at_start(&self) -> f64 {
        self.auc_at_start
    }

    /// Number of distinct lines after merging coincident ones.
    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn n_breakpoints(&self) -> usize {
        self.n_breakpoints
    }

    /// Step sizes processed so far.
    pub fn steps_processed(&self) -> usize {
        self.steps_processed
    }

    /// Pairwise line crossings processed so far.
    pub fn crossings(&self) -> usize {
        self.crossings
    }

    /// Breakpoint indices in current threshold order (coincident lines
    /// listed together).
    pub fn breakpoint_order(&self) -> Vec<usize> {
        self.perm
            .iter()
            .flat_map(|&l| self.lines[l].breakpoints.iter().copied())
            .collect()
    }

    pub fn queue(&self) -> &IntervalQueue {
        &self.queue
    }
}
