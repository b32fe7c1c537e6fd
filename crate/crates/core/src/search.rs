//! Exhaustive grid search over the vectorizer and SGD hyperparameters.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::split;
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, CvOptions, CvReport, Metric};
use crate::features::{NgramRange, Norm};
use crate::pipeline::{subset, PipelineConfig};
use crate::rng;
use crate::sgd::{LossKind, Penalty};

const DEV_SET_SALT: u64 = 0x6465_7673_6574;

fn default_ngram_ranges() -> Vec<NgramRange> {
    vec![NgramRange::UNIGRAMS, NgramRange::new(1, 2).expect("valid range")]
}
fn default_norms() -> Vec<Norm> {
    vec![Norm::L1, Norm::L2]
}
fn default_flags() -> Vec<bool> {
    vec![true, false]
}
fn default_penalties() -> Vec<Penalty> {
    vec![Penalty::L1, Penalty::L2]
}
fn default_alphas() -> Vec<f64> {
    vec![1e-3, 1e-4, 1e-5]
}
fn default_inner_folds() -> usize {
    3
}
fn default_dev_fraction() -> f64 {
    0.5
}

/// Axis values of the search. Missing JSON fields take the default grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_ngram_ranges")]
    pub ngram_ranges: Vec<NgramRange>,
    #[serde(default = "default_norms")]
    pub norms: Vec<Norm>,
    #[serde(default = "default_flags")]
    pub use_idf: Vec<bool>,
    #[serde(default = "default_flags")]
    pub smooth_idf: Vec<bool>,
    #[serde(default = "default_penalties")]
    pub penalties: Vec<Penalty>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_inner_folds")]
    pub inner_folds: usize,
    /// Share of the training data drawn (stratified) as the development set.
    #[serde(default = "default_dev_fraction")]
    pub dev_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            ngram_ranges: default_ngram_ranges(),
            norms: default_norms(),
            use_idf: default_flags(),
            smooth_idf: default_flags(),
            penalties: default_penalties(),
            alphas: default_alphas(),
            inner_folds: default_inner_folds(),
            dev_fraction: default_dev_fraction(),
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GridSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("ngram_ranges", self.ngram_ranges.len()),
            ("norms", self.norms.len()),
            ("use_idf", self.use_idf.len()),
            ("smooth_idf", self.smooth_idf.len()),
            ("penalties", self.penalties.len()),
            ("alphas", self.alphas.len()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, n)| *n == 0) {
            return Err(Error::EmptyAxis(name));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidConfig(format!("alpha {a} is not positive")));
        }
        if self.inner_folds < 2 {
            return Err(Error::InvalidConfig("inner_folds must be at least 2".into()));
        }
        if !(self.dev_fraction > 0.0 && self.dev_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!("dev_fraction {} is not in (0, 1]", self.dev_fraction)));
        }
        Ok(())
    }

    pub fn candidate_count(&self) -> usize {
        self.ngram_ranges.len()
            * self.norms.len()
            * self.use_idf.len()
            * self.smooth_idf.len()
            * self.penalties.len()
            * self.alphas.len()
    }
}

/// One point of the grid: the six tuned values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub ngram_range: NgramRange,
    pub norm: Norm,
    pub use_idf: bool,
    pub smooth_idf: bool,
    pub penalty: Penalty,
    pub alpha: f64,
}

impl GridPoint {
    pub fn of(config: &PipelineConfig) -> Self {
        Self {
            ngram_range: config.tfidf.ngram_range,
            norm: config.tfidf.norm,
            use_idf: config.tfidf.use_idf,
            smooth_idf: config.tfidf.smooth_idf,
            penalty: config.train.penalty,
            alpha: config.train.alpha,
        }
    }

    /// `base` with these six values substituted.
    pub fn apply(&self, base: &PipelineConfig) -> PipelineConfig {
        let mut c = *base;
        c.tfidf.ngram_range = self.ngram_range;
        c.tfidf.norm = self.norm;
        c.tfidf.use_idf = self.use_idf;
        c.tfidf.smooth_idf = self.smooth_idf;
        c.train.penalty = self.penalty;
        c.train.alpha = self.alpha;
        c
    }
}

impl fmt::Display for GridPoint {
    /// Tuple form, e.g. `(1,2),'l2',True,True,'l2',1e-05`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: bool| if b { "True" } else { "False" };
        write!(
            f,
            "{},'{}',{},{},'{}',{}",
            self.ngram_range,
            self.norm,
            flag(self.use_idf),
            flag(self.smooth_idf),
            self.penalty,
            format_float(self.alpha)
        )
    }
}

/// Shortest round-trip decimal, switching to `1e-05` style below 1e-4.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        let s = format!("{x}");
        if s.contains('.') || s.contains("inf") || s.contains("NaN") {
            s
        } else {
            format!("{s}.0")
        }
    } else {
        let s = format!("{x:e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        let (sign, digits) = exp.strip_prefix('-').map_or(("+", exp), |d| ("-", d));
        format!("{mantissa}e{sign}{digits:0>2}")
    }
}

/// Full Cartesian product, the first axis varying slowest and alpha fastest.
pub fn enumerate(spec: &GridSpec) -> Result<Vec<GridPoint>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.candidate_count());
    for &ngram_range in &spec.ngram_ranges {
        for &norm in &spec.norms {
            for &use_idf in &spec.use_idf {
                for &smooth_idf in &spec.smooth_idf {
                    for &penalty in &spec.penalties {
                        for &alpha in &spec.alphas {
                            out.push(GridPoint { ngram_range, norm, use_idf, smooth_idf, penalty, alpha });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Position in enumeration order.
    pub index: usize,
    pub params: GridPoint,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub rank: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTiming {
    /// Indexed by enumeration position.
    pub candidate_seconds: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub loss: LossKind,
    pub metric: Metric,
    pub dev_size: usize,
    pub inner_folds: usize,
    /// Best first.
    pub candidates: Vec<Candidate>,
    pub timing: SearchTiming,
}

impl SearchReport {
    pub fn winner(&self) -> Option<&Candidate> {
        self.candidates.first().filter(|c| c.error.is_none())
    }
}

/// Scores every grid point by stratified CV on a stratified development
/// subset and ranks them by mean score (descending), then standard
/// deviation (ascending), then enumeration order. Failing candidates are
/// ranked last and carry their error message.
pub fn grid_search<D: AsRef<[String]> + Sync>(
    documents: &[D],
    labels: &[u32],
    base: &PipelineConfig,
    spec: &GridSpec,
    metric: Metric,
) -> Result<SearchReport> {
    let points = enumerate(spec)?;
    if documents.len() != labels.len() {
        return Err(Error::LengthMismatch { left: documents.len(), right: labels.len() });
    }
    let started = Instant::now();
    let dev_indices: Vec<usize> = if spec.dev_fraction < 1.0 {
        split(labels, spec.dev_fraction, rng::mix(spec.seed, DEV_SET_SALT))?.train_indices
    } else {
        (0..labels.len()).collect()
    };
    let (dev_docs, dev_labels) = subset(documents, labels, &dev_indices);
    let options = CvOptions { metric, ..CvOptions::default() };

    let results: Vec<(Result<CvReport>, f64)> = points
        .par_iter()
        .map(|point| {
            let t = Instant::now();
            let r = cross_validate(&dev_docs, &dev_labels, &point.apply(base), spec.inner_folds, spec.seed, &options);
            (r, t.elapsed().as_secs_f64())
        })
        .collect();

    let mut candidate_seconds = Vec::with_capacity(points.len());
    let mut candidates: Vec<Candidate> = points
        .iter()
        .zip(results)
        .enumerate()
        .map(|(index, (&params, (result, secs)))| {
            candidate_seconds.push(secs);
            match result {
                Ok(report) => {
                    Candidate { index, params, mean: Some(report.mean), std: Some(report.std), rank: 0, error: None }
                }
                Err(e) => {
                    let e = Error::Candidate { index, source: Box::new(e) };
                    log::warn!("{e}");
                    Candidate { index, params, mean: None, std: None, rank: 0, error: Some(e.to_string()) }
                }
            }
        })
        .collect();
    candidates.sort_by(|a, b| match (a.mean, b.mean) {
        (Some(ma), Some(mb)) => {
            mb.total_cmp(&ma).then(a.std.unwrap_or(0.0).total_cmp(&b.std.unwrap_or(0.0))).then(a.index.cmp(&b.index))
        }
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    });
    for (rank, c) in candidates.iter_mut().enumerate() {
        c.rank = rank + 1;
    }
    Ok(SearchReport {
        loss: base.train.loss,
        metric,
        dev_size: dev_indices.len(),
        inner_folds: spec.inner_folds,
        candidates,
        timing: SearchTiming { candidate_seconds, total_seconds: started.elapsed().as_secs_f64() },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub default: CvReport,
    pub tuned: CvReport,
    /// `tuned.mean - default.mean`.
    pub mean_delta: f64,
    /// `tuned - default` total seconds.
    pub seconds_delta: f64,
}

/// Cross-validates two configurations on the same fold plan.
pub fn compare_runs<D: AsRef<[String]> + Sync>(
    documents: &[D],
    labels: &[u32],
    default: &PipelineConfig,
    tuned: &PipelineConfig,
    k: usize,
    seed: u64,
    options: &CvOptions,
) -> Result<Comparison> {
    let default = cross_validate(documents, labels, default, k, seed, options)?;
    let tuned = cross_validate(documents, labels, tuned, k, seed, options)?;
    Ok(Comparison {
        mean_delta: tuned.mean - default.mean,
        seconds_delta: tuned.timing.total_seconds - default.timing.total_seconds,
        default,
        tuned,
    })
}
