//! Pending intersections between adjacent threshold lines.
//!
//! Three nested levels: an [`IntervalQueue`] maps step sizes to
//! [`IntervalColumn`]s, a column maps intersection thresholds to
//! [`IntervalGroup`]s, and a group lists the adjacent line pairs meeting at
//! that `(step, threshold)`. Keys that are within a relative `1e-12` of an
//! existing key join it, so intersections that coincide up to rounding land in
//! one group.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;

/// Relative tolerance for merging step and threshold keys.
pub const GROUPING_TOLERANCE: f64 = 1e-12;

pub(crate) fn step_tolerance(step: f64) -> f64 {
    GROUPING_TOLERANCE * step.abs().max(1.0)
}

/// Line pairs `(left, right)` meeting at the same point. Lines are identified
/// by their index in the sweep, not by position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalGroup {
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalColumn {
    pub groups: BTreeMap<OrderedFloat<f64>, IntervalGroup>,
}

impl IntervalColumn {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.groups.values().flat_map(|g| g.pairs.iter().copied())
    }
}

#[derive(Clone, Debug, Default)]
pub struct IntervalQueue {
    columns: BTreeMap<OrderedFloat<f64>, IntervalColumn>,
}

fn nearest_key<V>(map: &BTreeMap<OrderedFloat<f64>, V>, key: f64, tol: f64) -> Option<OrderedFloat<f64>> {
    map.range(OrderedFloat(key - tol)..=OrderedFloat(key + tol))
        .map(|(k, _)| *k)
        .min_by(|a, b| (a.0 - key).abs().total_cmp(&(b.0 - key).abs()))
}

impl IntervalQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, step: f64, threshold: f64, left: usize, right: usize) {
        let key = nearest_key(&self.columns, step, step_tolerance(step)).unwrap_or(OrderedFloat(step));
        let column = self.columns.entry(key).or_default();
        let tkey = nearest_key(&column.groups, threshold, step_tolerance(threshold)).unwrap_or(OrderedFloat(threshold));
        let group = column.groups.entry(tkey).or_default();
        if !group.pairs.contains(&(left, right)) {
            group.pairs.push((left, right));
        }
    }

    pub fn first_step(&self) -> Option<f64> {
        self.columns.keys().next().map(|k| k.0)
    }

    pub fn first(&self) -> Option<(f64, &IntervalColumn)> {
        self.columns.iter().next().map(|(k, c)| (k.0, c))
    }

    pub fn pop_first(&mut self) -> Option<(f64, IntervalColumn)> {
        self.columns.pop_first().map(|(k, c)| (k.0, c))
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Number of columns (distinct pending step sizes).
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &IntervalColumn)> {
        self.columns.iter().map(|(k, c)| (k.0, c))
    }
}
