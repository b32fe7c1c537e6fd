//! Sparse feature vectors stored as sorted `(index, value)` pairs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// A sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from unordered pairs. Duplicate indices are summed and
    /// zeros (including sums that cancel) are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Self { entries: merged }
    }

    /// Builds a vector from a dense slice, skipping zeros.
    pub fn from_dense(values: &[f64]) -> Self {
        Self { entries: values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect() }
    }

    /// Wraps entries that are already sorted, deduplicated and zero-free.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, v)| v != 0.0));
        Self { entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries.binary_search_by_key(&index, |&(i, _)| i).map(|pos| self.entries[pos].1).unwrap_or(0.0)
    }

    /// Largest stored index, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v.abs()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v.is_finite())
    }

    /// Dot product against a dense row. Indices beyond the row are ignored.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().filter_map(|&(i, v)| dense.get(i).map(|w| w * v)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_pairs(self.entries.iter().map(|&(i, v)| (i, v * factor)))
    }

    /// Squared Euclidean distance, merging the two index lists.
    pub fn squared_distance(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    acc += a[i].1 * a[i].1;
                    i += 1;
                }
                Ordering::Greater => {
                    acc += b[j].1 * b[j].1;
                    j += 1;
                }
                Ordering::Equal => {
                    let d = a[i].1 - b[j].1;
                    acc += d * d;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc += a[i..].iter().map(|&(_, v)| v * v).sum::<f64>();
        acc += b[j..].iter().map(|&(_, v)| v * v).sum::<f64>();
        acc
    }

    /// Applies `f(a_value, b_value)` over the union of both index sets.
    pub(crate) fn zip_union(&self, other: &SparseVector, mut f: impl FnMut(f64, f64) -> f64) -> SparseVector {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut push = |idx: usize, v: f64| {
            if v != 0.0 {
                out.push((idx, v));
            }
        };
        while i < a.len() || j < b.len() {
            let next_a = a.get(i).map(|e| e.0).unwrap_or(usize::MAX);
            let next_b = b.get(j).map(|e| e.0).unwrap_or(usize::MAX);
            match next_a.cmp(&next_b) {
                Ordering::Less => {
                    push(next_a, f(a[i].1, 0.0));
                    i += 1;
                }
                Ordering::Greater => {
                    push(next_b, f(0.0, b[j].1));
                    j += 1;
                }
                Ordering::Equal => {
                    push(next_a, f(a[i].1, b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        SparseVector::from_sorted_unchecked(out)
    }
}

impl FromIterator<(usize, f64)> for SparseVector {
    fn from_iter<T: IntoIterator<Item = (usize, f64)>>(iter: T) -> Self {
        Self::from_pairs(iter)
    }
}
