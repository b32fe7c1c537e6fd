//! One-vs-rest linear classifiers trained by per-sample stochastic gradient descent.
//!
//! For a sample `x` with label `y ∈ {-1, +1}` and score `f = w·x + b`, each
//! step moves against the gradient of `loss(y f) + penalty(w)`:
//!
//! ```text
//! w ← w − η_t (loss'(y f) y x + ∂penalty(w))
//! b ← b − η_t loss'(y f) y
//! ```
//!
//! with the decaying step `η_t = 1 / (alpha (t0 + t))`. The L2 penalty
//! `alpha/2 ‖w‖²` is applied through a global scale factor; the L1 penalty
//! `alpha ‖w‖₁` uses cumulative clipping that is only settled on the
//! coordinates a sample touches, so each step costs O(nnz(x)).

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::distinct_labels;
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::sparse::SparseVector;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Linear SVM.
    Hinge,
    /// Logistic regression.
    Log,
    Perceptron,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Hinge, LossKind::Log, LossKind::Perceptron];

    /// Loss as a function of the margin `m = y f`.
    pub fn loss(self, m: f64) -> f64 {
        match self {
            LossKind::Hinge => (1.0 - m).max(0.0),
            LossKind::Log => {
                if m > 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
            LossKind::Perceptron => (-m).max(0.0),
        }
    }

    /// Derivative (or the subgradient used at the kink) with respect to the margin.
    pub fn dloss(self, m: f64) -> f64 {
        match self {
            LossKind::Hinge => {
                if m < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Log => {
                if m > 0.0 {
                    let e = (-m).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + m.exp())
                }
            }
            // at m = 0 a zero-initialized perceptron must still move
            LossKind::Perceptron => {
                if m <= 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound on the second derivative in the margin (zero for piecewise-linear losses).
    fn curvature(self) -> f64 {
        match self {
            LossKind::Log => 0.25,
            LossKind::Hinge | LossKind::Perceptron => 0.0,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            LossKind::Hinge => "SVM",
            LossKind::Log => "Logistic Reg.",
            LossKind::Perceptron => "Perceptron",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Hinge => "svm",
            LossKind::Log => "logreg",
            LossKind::Perceptron => "perceptron",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svm" | "hinge" => Ok(LossKind::Hinge),
            "logreg" | "log" | "logistic" => Ok(LossKind::Log),
            "perceptron" => Ok(LossKind::Perceptron),
            _ => Err(Error::InvalidConfig(format!("unknown loss `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    #[default]
    L2,
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Penalty::L1 => "l1",
            Penalty::L2 => "l2",
        })
    }
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Penalty::L1),
            "l2" => Ok(Penalty::L2),
            _ => Err(Error::InvalidConfig(format!("unknown penalty `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub penalty: Penalty,
    pub alpha: f64,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { loss: LossKind::Hinge, penalty: Penalty::L2, alpha: 1e-4, epochs: 5, seed: 0, shuffle_each_epoch: true }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Step sizes `η_t = 1 / (alpha (t0 + t))`, `t = 1, 2, ...`.
///
/// `t0` is chosen from an initial step `η0 = 1 / (alpha t0)`. The starting
/// point is the usual heuristic for a typical weight magnitude
/// `1 / sqrt(sqrt(alpha))`, which is then capped by the inverse of the
/// largest curvature any single step can see: the loss curvature times the
/// largest `‖x‖² + 1` in the data (the `+1` is the intercept), plus `alpha`
/// under the L2 penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningSchedule {
    alpha: f64,
    t0: f64,
}

impl LearningSchedule {
    pub fn new(config: &TrainConfig, xs: &[SparseVector]) -> Self {
        let alpha = config.alpha;
        let typical_weight = (1.0 / alpha.sqrt()).sqrt();
        let heuristic = typical_weight / (-config.loss.dloss(-typical_weight)).max(1.0);
        let max_sq_norm = xs.iter().map(SparseVector::squared_norm).fold(0.0, f64::max);
        let mut curvature = config.loss.curvature() * (max_sq_norm + 1.0);
        if config.penalty == Penalty::L2 {
            curvature += alpha;
        }
        let eta0 = if curvature > 0.0 { heuristic.min(1.0 / curvature) } else { heuristic };
        Self { alpha, t0: 1.0 / (alpha * eta0) }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Step size for the 1-based global step counter `t`.
    pub fn eta(&self, t: u64) -> f64 {
        1.0 / (self.alpha * (self.t0 + t as f64))
    }
}

/// Sample indices in the order SGD visits them across all epochs.
pub fn visiting_order(n: usize, config: &TrainConfig) -> Vec<usize> {
    let mut rng = rng::stream(config.seed, Stream::Shuffle);
    let mut order: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n * config.epochs);
    for epoch in 0..config.epochs {
        if epoch == 0 || config.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        out.extend_from_slice(&order);
    }
    out
}

/// A single weight row and intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl BinaryModel {
    pub fn zeros(dim: usize) -> Self {
        Self { weights: vec![0.0; dim], intercept: 0.0 }
    }

    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.intercept
    }
}

/// Dense weights stored as `scale * values`, with cumulative L1 bookkeeping.
struct WeightVector {
    values: Vec<f64>,
    scale: f64,
    /// Signed L1 penalty already applied per coordinate.
    applied: Vec<f64>,
    /// Total L1 penalty any coordinate could have received so far.
    accrued: f64,
}

impl WeightVector {
    fn new(dim: usize, l1: bool) -> Self {
        Self { values: vec![0.0; dim], scale: 1.0, applied: if l1 { vec![0.0; dim] } else { Vec::new() }, accrued: 0.0 }
    }

    fn dot(&self, x: &SparseVector) -> f64 {
        self.scale * x.iter().map(|(j, v)| self.values[j] * v).sum::<f64>()
    }

    fn add(&mut self, x: &SparseVector, c: f64) {
        let c = c / self.scale;
        for (j, v) in x.iter() {
            self.values[j] += c * v;
        }
    }

    fn rescale(&mut self, factor: f64) {
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.materialize();
        }
    }

    fn materialize(&mut self) {
        if self.scale != 1.0 {
            for w in &mut self.values {
                *w *= self.scale;
            }
            self.scale = 1.0;
        }
    }

    /// Settles the outstanding L1 penalty on one coordinate, clipping at zero.
    fn settle(&mut self, j: usize) {
        let z = self.values[j];
        if z > 0.0 {
            self.values[j] = (z - (self.accrued + self.applied[j])).max(0.0);
        } else if z < 0.0 {
            self.values[j] = (z + (self.accrued - self.applied[j])).min(0.0);
        }
        self.applied[j] += self.values[j] - z;
    }

    fn settle_touched(&mut self, x: &SparseVector) {
        for (j, _) in x.iter() {
            self.settle(j);
        }
    }

    fn settle_all(&mut self) {
        for j in 0..self.values.len() {
            self.settle(j);
        }
    }
}

fn validate_inputs(xs: &[SparseVector], ys: &[f64], dim: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(bad) = ys.iter().find(|&&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidConfig(format!("binary labels must be ±1, got {bad}")));
    }
    for (i, x) in xs.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFiniteFeature { sample: i });
        }
        if let Some(index) = x.max_index().filter(|&m| m >= dim) {
            return Err(Error::FeatureOutOfRange { index, dim });
        }
    }
    Ok(())
}

fn feature_dim(xs: &[SparseVector]) -> usize {
    xs.iter().filter_map(SparseVector::max_index).max().map_or(0, |m| m + 1)
}

/// Trains one binary classifier on labels `±1`.
pub fn fit_binary(xs: &[SparseVector], ys: &[f64], config: &TrainConfig) -> Result<BinaryModel> {
    fit_binary_dim(xs, ys, feature_dim(xs), config)
}

/// As [`fit_binary`] with an explicit weight dimension (at least the largest index + 1).
pub fn fit_binary_dim(xs: &[SparseVector], ys: &[f64], dim: usize, config: &TrainConfig) -> Result<BinaryModel> {
    config.validate()?;
    validate_inputs(xs, ys, dim)?;
    let schedule = LearningSchedule::new(config, xs);
    let order = visiting_order(xs.len(), config);
    run_sgd(xs, ys, dim, config, &schedule, &order)
}

fn run_sgd(
    xs: &[SparseVector],
    ys: &[f64],
    dim: usize,
    config: &TrainConfig,
    schedule: &LearningSchedule,
    order: &[usize],
) -> Result<BinaryModel> {
    let l1 = config.penalty == Penalty::L1;
    let mut w = WeightVector::new(dim, l1);
    let mut intercept = 0.0;
    for (step, &i) in order.iter().enumerate() {
        let eta = schedule.eta(step as u64 + 1);
        let (x, y) = (&xs[i], ys[i]);
        if l1 {
            w.settle_touched(x);
        }
        let margin = y * (w.dot(x) + intercept);
        let grad = config.loss.dloss(margin) * y;
        if !l1 {
            w.rescale(1.0 - eta * config.alpha);
        }
        if grad != 0.0 {
            w.add(x, -eta * grad);
            intercept -= eta * grad;
        }
        if l1 {
            w.accrued += eta * config.alpha;
            w.settle_touched(x);
        }
    }
    if l1 {
        w.settle_all();
    }
    w.materialize();
    if !intercept.is_finite() || w.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged);
    }
    Ok(BinaryModel { weights: w.values, intercept })
}

/// Per-class weight rows and intercepts; scores are `W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    classes: Vec<u32>,
    feature_dim: usize,
    weights: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
}

impl LinearModel {
    pub fn new(classes: Vec<u32>, weights: Vec<Vec<f64>>, intercepts: Vec<f64>) -> Result<Self> {
        let feature_dim = weights.first().map_or(0, Vec::len);
        if classes.is_empty() {
            return Err(Error::InvalidModel("no classes".into()));
        }
        if weights.len() != classes.len() || intercepts.len() != classes.len() {
            return Err(Error::InvalidModel(format!(
                "{} classes but {} weight rows and {} intercepts",
                classes.len(),
                weights.len(),
                intercepts.len()
            )));
        }
        if weights.iter().any(|row| row.len() != feature_dim) {
            return Err(Error::InvalidModel("ragged weight rows".into()));
        }
        if weights.iter().flatten().chain(&intercepts).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite weight".into()));
        }
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel("classes must be strictly ascending".into()));
        }
        Ok(Self { classes, feature_dim, weights, intercepts })
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn decision(&self, x: &SparseVector) -> Result<Vec<f64>> {
        if let Some(index) = x.max_index().filter(|&m| m >= self.feature_dim) {
            return Err(Error::FeatureOutOfRange { index, dim: self.feature_dim });
        }
        Ok(self.weights.iter().zip(&self.intercepts).map(|(row, b)| x.dot_dense(row) + b).collect())
    }

    /// Class with the highest score; ties go to the earliest class.
    pub fn predict(&self, x: &SparseVector) -> Result<u32> {
        let scores = self.decision(x)?;
        Ok(self.classes[argmax(&scores)])
    }

    pub fn predict_all(&self, xs: &[SparseVector]) -> Result<Vec<u32>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            classes: self.classes.clone(),
            feature_dim: self.feature_dim,
            intercepts: self.intercepts.clone(),
            weights: self.weights.iter().map(|row| SparseVector::from_dense(row)).collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch { expected: MODEL_FORMAT_VERSION, found: file.version });
        }
        let mut rows = Vec::with_capacity(file.weights.len());
        for row in &file.weights {
            let raw = row.entries();
            if raw.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::InvalidModel("weight indices must be strictly increasing".into()));
            }
            let mut dense = vec![0.0; file.feature_dim];
            for &(j, v) in raw {
                *dense.get_mut(j).ok_or(Error::FeatureOutOfRange { index: j, dim: file.feature_dim })? = v;
            }
            rows.push(dense);
        }
        Self::new(file.classes, rows, file.intercepts)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    classes: Vec<u32>,
    feature_dim: usize,
    intercepts: Vec<f64>,
    weights: Vec<SparseVector>,
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

/// One-vs-rest training: one binary fit per class, all sharing the same visiting order.
pub fn fit_multiclass(xs: &[SparseVector], labels: &[u32], config: &TrainConfig) -> Result<LinearModel> {
    fit_multiclass_dim(xs, labels, feature_dim(xs), config)
}

pub fn fit_multiclass_dim(
    xs: &[SparseVector],
    labels: &[u32],
    dim: usize,
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    if xs.len() != labels.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: labels.len() });
    }
    let classes = distinct_labels(labels);
    if classes.len() < 2 {
        return Err(Error::SingleClass(classes.len()));
    }
    let probe: Vec<f64> = vec![1.0; xs.len()];
    validate_inputs(xs, &probe, dim)?;
    let schedule = LearningSchedule::new(config, xs);
    let order = visiting_order(xs.len(), config);
    let fits: Vec<BinaryModel> = classes
        .par_iter()
        .map(|&c| {
            let ys: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            run_sgd(xs, &ys, dim, config, &schedule, &order)
        })
        .collect::<Result<_>>()?;
    let (weights, intercepts) = fits.into_iter().map(|m| (m.weights, m.intercept)).unzip();
    LinearModel::new(classes, weights, intercepts)
}

/// Regularized empirical risk `(1/N) Σ loss(y (w·x + b)) + penalty(w)` with
/// `alpha/2 ‖w‖²` for L2 and `alpha ‖w‖₁` for L1.
pub fn objective(xs: &[SparseVector], ys: &[f64], model: &BinaryModel, config: &TrainConfig) -> f64 {
    let data: f64 =
        xs.iter().zip(ys).map(|(x, &y)| config.loss.loss(y * model.decision(x))).sum::<f64>() / xs.len() as f64;
    let reg = match config.penalty {
        Penalty::L2 => 0.5 * config.alpha * model.weights.iter().map(|w| w * w).sum::<f64>(),
        Penalty::L1 => config.alpha * model.weights.iter().map(|w| w.abs()).sum::<f64>(),
    };
    data + reg
}

/// Full-batch (sub)gradient descent on [`objective`] with a fixed step
/// `1 / (0.25 (max ‖x‖² + 1) + alpha)`, the inverse smoothness bound of the
/// L2-regularized logistic objective. Used as a reference optimizer in tests.
pub fn batch_gd_oracle(xs: &[SparseVector], ys: &[f64], config: &TrainConfig, iterations: usize) -> BinaryModel {
    let dim = feature_dim(xs);
    let mut model = BinaryModel::zeros(dim);
    let max_sq = xs.iter().map(SparseVector::squared_norm).fold(0.0, f64::max);
    let step = 1.0 / (0.25 * (max_sq + 1.0) + config.alpha);
    let n = xs.len() as f64;
    for _ in 0..iterations {
        let mut grad_w = vec![0.0; dim];
        let mut grad_b = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let g = config.loss.dloss(y * model.decision(x)) * y;
            if g != 0.0 {
                for (j, v) in x.iter() {
                    grad_w[j] += g * v / n;
                }
                grad_b += g / n;
            }
        }
        for (gw, w) in grad_w.iter_mut().zip(&model.weights) {
            *gw += match config.penalty {
                Penalty::L2 => config.alpha * w,
                Penalty::L1 => config.alpha * w.signum() * (*w != 0.0) as u8 as f64,
            };
        }
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= step * g;
        }
        model.intercept -= step * grad_b;
    }
    model
}
