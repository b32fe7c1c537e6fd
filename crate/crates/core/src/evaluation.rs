//! Confusion matrices, per-class metrics, stratified folds and cross-validation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::members_by_class;
use crate::error::{Error, Result};
use crate::pipeline::{subset, FittedPipeline, PipelineConfig};
use crate::rng::{self, Stream};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.trace() as f64, self.total() as f64)
    }
}

pub fn confusion(truth: &[u32], predicted: &[u32], classes: &[u32]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: predicted.len() });
    }
    let position = |label: u32| classes.iter().position(|&c| c == label).ok_or(Error::UnknownLabel(label));
    let mut counts = vec![vec![0u64; classes.len()]; classes.len()];
    for (&t, &p) in truth.iter().zip(predicted) {
        counts[position(t)?][position(p)?] += 1;
    }
    Ok(ConfusionMatrix { classes: classes.to_vec(), counts })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    ratio(2.0 * precision * recall, precision + recall)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: u32,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean over classes.
    pub macro_avg: Averages,
    /// Support-weighted mean over classes.
    pub weighted_avg: Averages,
    /// Pooled counts over all classes.
    pub micro_avg: Averages,
    pub accuracy: f64,
    pub total: u64,
}

/// Precision, recall and F1 per class, read one-vs-rest off the matrix.
/// Any 0/0 ratio is reported as 0.
pub fn per_class_metrics(cm: &ConfusionMatrix) -> Result<ClassReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let k = cm.classes.len();
    let (mut tp_sum, mut fp_sum, mut fn_sum) = (0u64, 0u64, 0u64);
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let row: u64 = cm.counts[c].iter().sum();
            let col: u64 = cm.counts.iter().map(|r| r[c]).sum();
            let (fp, fn_) = (col - tp, row - tp);
            tp_sum += tp;
            fp_sum += fp;
            fn_sum += fn_;
            let precision = ratio(tp as f64, (tp + fp) as f64);
            let recall = ratio(tp as f64, (tp + fn_) as f64);
            ClassMetrics { label: cm.classes[c], precision, recall, f1: f1(precision, recall), support: row }
        })
        .collect();

    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    let weighted =
        |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total as f64;
    let macro_avg = Averages { precision: mean(|m| m.precision), recall: mean(|m| m.recall), f1: mean(|m| m.f1) };
    let weighted_avg =
        Averages { precision: weighted(|m| m.precision), recall: weighted(|m| m.recall), f1: weighted(|m| m.f1) };
    let micro_p = ratio(tp_sum as f64, (tp_sum + fp_sum) as f64);
    let micro_r = ratio(tp_sum as f64, (tp_sum + fn_sum) as f64);
    let micro_avg = Averages { precision: micro_p, recall: micro_r, f1: f1(micro_p, micro_r) };
    Ok(ClassReport { per_class, macro_avg, weighted_avg, micro_avg, accuracy: cm.accuracy(), total })
}

/// Disjoint folds covering `0..N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every index outside `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        train.sort_unstable();
        train
    }
}

/// Shuffles each class with the seed, then deals its members round-robin
/// across folds. The dealing position carries over between classes so fold
/// sizes stay within one of each other.
pub fn stratified_kfold(labels: &[u32], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::TooManyFolds { k, n: labels.len() });
    }
    let mut rng = rng::stream(seed, Stream::Folds);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (label, mut members) in members_by_class(labels) {
        if members.len() < k {
            log::warn!("class {label} has {} members, fewer than {k} folds", members.len());
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { folds, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdKind {
    /// Divide by k.
    #[default]
    Population,
    /// Divide by k - 1.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Accuracy,
    MacroF1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CvOptions {
    pub std: StdKind,
    pub metric: Metric,
    /// Score each fold's model on its own training folds instead of the held-out fold.
    pub resubstitution: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvTiming {
    pub fold_seconds: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub metric: Metric,
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub timing: CvTiming,
}

impl CvReport {
    /// `μ (+/- σ)` with five decimals.
    pub fn summary(&self) -> String {
        format!("{:.5} (+/- {:.5})", self.mean, self.std)
    }
}

pub fn mean_std(values: &[f64], kind: StdKind) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let denom = match kind {
        StdKind::Population => n,
        StdKind::Sample => (n - 1.0).max(1.0),
    };
    (mean, (ss / denom).sqrt())
}

/// Scores predictions under the chosen metric.
pub fn score(truth: &[u32], predicted: &[u32], metric: Metric) -> Result<f64> {
    let mut classes: Vec<u32> = truth.iter().chain(predicted).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    let cm = confusion(truth, predicted, &classes)?;
    match metric {
        Metric::Accuracy => {
            if cm.total() == 0 {
                return Err(Error::EmptyEvaluation);
            }
            Ok(cm.accuracy())
        }
        Metric::MacroF1 => Ok(per_class_metrics(&cm)?.macro_avg.f1),
    }
}

/// Stratified k-fold cross-validation of the whole pipeline. The vectorizer,
/// SMOTE and the classifier are refit on each fold's training part, so the
/// held-out fold never influences the vocabulary or weights.
pub fn cross_validate<D: AsRef<[String]> + Sync>(
    documents: &[D],
    labels: &[u32],
    config: &PipelineConfig,
    k: usize,
    seed: u64,
    options: &CvOptions,
) -> Result<CvReport> {
    if documents.len() != labels.len() {
        return Err(Error::LengthMismatch { left: documents.len(), right: labels.len() });
    }
    let plan = stratified_kfold(labels, k, seed)?;
    let started = Instant::now();
    let results: Vec<Result<(f64, f64)>> = (0..plan.k())
        .into_par_iter()
        .map(|fold| {
            let fold_started = Instant::now();
            let train = plan.train_indices(fold);
            let (train_docs, train_labels) = subset(documents, labels, &train);
            let eval_idx = if options.resubstitution { &train[..] } else { plan.test_indices(fold) };
            let (eval_docs, eval_labels) = subset(documents, labels, eval_idx);
            let fitted = FittedPipeline::fit(&train_docs, &train_labels, config)?;
            let predicted = fitted.predict(&eval_docs)?;
            let s = score(&eval_labels, &predicted, options.metric)?;
            Ok((s, fold_started.elapsed().as_secs_f64()))
        })
        .collect();

    let mut fold_scores = Vec::with_capacity(plan.k());
    let mut fold_seconds = Vec::with_capacity(plan.k());
    for (fold, r) in results.into_iter().enumerate() {
        let (s, secs) = r.map_err(|e| Error::Fold { fold, source: Box::new(e) })?;
        fold_scores.push(s);
        fold_seconds.push(secs);
    }
    let (mean, std) = mean_std(&fold_scores, options.std);
    Ok(CvReport {
        metric: options.metric,
        fold_scores,
        mean,
        std,
        timing: CvTiming { fold_seconds, total_seconds: started.elapsed().as_secs_f64() },
    })
}
