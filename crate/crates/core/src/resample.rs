//! SMOTE oversampling in feature space.
//!
//! Each minority class is grown to the majority count by appending synthetic
//! points `a + gap (b - a)`, where `a` is a class member, `b` one of its `k`
//! nearest same-class neighbours and `gap ~ U[0, 1)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::members_by_class;
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { k_neighbors: 5, seed: 0 }
    }
}

/// Positions (into `points`) of the `k` nearest neighbours of `points[query]`
/// by Euclidean distance, nearest first, excluding the query itself. Ties go
/// to the lower position; `k` is clamped to `points.len() - 1`.
pub fn knn_indices(points: &[SparseVector], query: usize, k: usize) -> Vec<usize> {
    let q = &points[query];
    let mut dists: Vec<(f64, usize)> =
        points.iter().enumerate().filter(|&(i, _)| i != query).map(|(i, p)| (q.squared_distance(p), i)).collect();
    let k = k.min(dists.len());
    if k == 0 {
        return Vec::new();
    }
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dists.len() {
        dists.select_nth_unstable_by(k - 1, by_distance);
        dists.truncate(k);
    }
    dists.sort_by(by_distance);
    dists.into_iter().map(|(_, i)| i).collect()
}

/// `a + gap (b - a)` over the union of both supports.
pub fn interpolate(a: &SparseVector, b: &SparseVector, gap: f64) -> SparseVector {
    a.zip_union(b, |x, y| x + gap * (y - x))
}

/// How a synthetic sample was generated; positions refer to the input arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    /// The input vectors followed by the synthetic ones.
    pub vectors: Vec<SparseVector>,
    pub labels: Vec<u32>,
    /// One entry per synthetic sample, in output order.
    pub origins: Vec<SyntheticOrigin>,
}

impl SmoteOutput {
    pub fn synthetic_count(&self) -> usize {
        self.origins.len()
    }
}

/// Oversamples every class up to the majority class count.
///
/// Classes are processed in ascending label order and their synthetic
/// samples appended in that order. A class with a single member has no
/// neighbour and is grown by duplication.
pub fn smote(xs: &[SparseVector], labels: &[u32], config: &SmoteConfig) -> Result<SmoteOutput> {
    if xs.len() != labels.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: labels.len() });
    }
    if config.k_neighbors == 0 {
        return Err(Error::InvalidConfig("k_neighbors must be at least 1".into()));
    }
    let groups = members_by_class(labels);
    if groups.len() < 2 {
        return Err(Error::SingleClass(groups.len()));
    }
    let majority = groups.values().map(Vec::len).max().unwrap_or(0);

    let per_class: Vec<(u32, Vec<SyntheticOrigin>)> = groups
        .par_iter()
        .map(|(&label, members)| (label, class_origins(xs, label, members, majority, config)))
        .collect();

    let mut vectors = xs.to_vec();
    let mut out_labels = labels.to_vec();
    let mut origins = Vec::new();
    for (label, class_origins) in per_class {
        for origin in class_origins {
            vectors.push(interpolate(&xs[origin.base], &xs[origin.neighbor], origin.gap));
            out_labels.push(label);
            origins.push(origin);
        }
    }
    Ok(SmoteOutput { vectors, labels: out_labels, origins })
}

fn class_origins(
    xs: &[SparseVector],
    label: u32,
    members: &[usize],
    target: usize,
    config: &SmoteConfig,
) -> Vec<SyntheticOrigin> {
    let need = target - members.len();
    if need == 0 {
        return Vec::new();
    }
    if members.len() == 1 {
        log::warn!("class {label} has one sample; SMOTE falls back to duplication");
        let only = members[0];
        return vec![SyntheticOrigin { base: only, neighbor: only, gap: 0.0 }; need];
    }

    let points: Vec<SparseVector> = members.iter().map(|&i| xs[i].clone()).collect();
    let bases = need.min(members.len());
    let neighbors: Vec<Vec<usize>> =
        (0..bases).into_par_iter().map(|local| knn_indices(&points, local, config.k_neighbors)).collect();

    let mut rng = rng::substream(config.seed, Stream::Smote, u64::from(label));
    (0..need)
        .map(|s| {
            let local = s % members.len();
            let candidates = &neighbors[local];
            let pick = candidates[rng.gen_range(0..candidates.len())];
            SyntheticOrigin { base: members[local], neighbor: members[pick], gap: rng.gen::<f64>() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<SparseVector> {
        xs.iter().map(|&x| SparseVector::from_pairs([(0, x)])).collect()
    }

    #[test]
    fn knn_on_a_line() {
        let pts = line(&[0.0, 1.0, 5.0]);
        assert_eq!(knn_indices(&pts, 0, 1), vec![1]);
        assert_eq!(knn_indices(&pts, 0, 2), vec![1, 2]);
        assert_eq!(knn_indices(&pts, 0, 10), vec![1, 2]);
        assert_eq!(knn_indices(&pts, 2, 2), vec![1, 0]);
    }

    #[test]
    fn knn_ties_prefer_lower_index() {
        let pts = line(&[2.0, 1.0, 3.0]);
        assert_eq!(knn_indices(&pts, 0, 1), vec![1]);
        let pts = line(&[3.0, 2.0, 1.0]);
        assert_eq!(knn_indices(&pts, 1, 1), vec![0]);
    }

    #[test]
    fn knn_single_point_has_no_neighbours() {
        assert!(knn_indices(&line(&[1.0]), 0, 5).is_empty());
    }

    #[test]
    fn interpolate_examples() {
        let a = SparseVector::from_pairs([(0, 1.0), (3, 2.0)]);
        let b = SparseVector::from_pairs([(1, 4.0), (3, -2.0)]);
        assert_eq!(interpolate(&a, &b, 0.0), a);
        assert_eq!(interpolate(&a, &b, 1.0), b);
        let zero_start = SparseVector::from_pairs([(0, 0.0)]);
        let end = SparseVector::from_pairs([(0, 2.0)]);
        assert_eq!(interpolate(&zero_start, &end, 0.25).entries(), &[(0, 0.5)]);
    }

    #[test]
    fn smote_balances_counts() {
        let xs = line(&[0.0, 1.0, 2.0, 3.0, 10.0, 11.0]);
        let labels = [0, 0, 0, 0, 1, 1];
        let out = smote(&xs, &labels, &SmoteConfig::default()).unwrap();
        assert_eq!(out.vectors.len(), 8);
        assert_eq!(out.synthetic_count(), 2);
        assert_eq!(&out.labels[6..], &[1, 1]);
        for v in &out.vectors[6..] {
            let x = v.get(0);
            assert!((10.0..=11.0).contains(&x));
        }
    }

    #[test]
    fn smote_balanced_input_unchanged() {
        let xs = line(&[0.0, 1.0, 2.0, 3.0]);
        let labels = [0, 1, 0, 1];
        let out = smote(&xs, &labels, &SmoteConfig::default()).unwrap();
        assert_eq!(out.vectors, xs);
        assert_eq!(out.labels, labels);
        assert!(out.origins.is_empty());
    }

    #[test]
    fn smote_singleton_class_duplicates() {
        let xs = line(&[0.0, 1.0, 2.0, 7.0]);
        let labels = [0, 0, 0, 1];
        let out = smote(&xs, &labels, &SmoteConfig::default()).unwrap();
        assert_eq!(&out.vectors[4..], &[xs[3].clone(), xs[3].clone()]);
    }

    #[test]
    fn smote_is_deterministic_and_seeded() {
        let xs = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 11.0, 12.0]);
        let labels = [0, 0, 0, 0, 0, 0, 1, 1, 1];
        let cfg = SmoteConfig { k_neighbors: 2, seed: 4 };
        let a = smote(&xs, &labels, &cfg).unwrap();
        assert_eq!(a, smote(&xs, &labels, &cfg).unwrap());
        let b = smote(&xs, &labels, &SmoteConfig { seed: 5, ..cfg }).unwrap();
        assert_ne!(a.origins, b.origins);
    }

    #[test]
    fn smote_requires_two_classes() {
        assert!(smote(&line(&[0.0, 1.0]), &[3, 3], &SmoteConfig::default()).is_err());
    }
}
