//! Text classification with one-vs-rest linear models trained by stochastic
//! gradient descent on TF-IDF features, with SMOTE rebalancing, stratified
//! cross-validation and exhaustive grid search over the pipeline's
//! hyperparameters.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod pipeline;
pub mod report;
pub mod resample;
pub mod rng;
pub mod search;
pub mod sgd;
pub mod sparse;

pub use corpus::{clean_text, load_corpus, split, LabeledCorpus, Schema, SplitPlan, StopWords};
pub use error::{Error, Result};
pub use evaluation::{
    confusion, cross_validate, per_class_metrics, stratified_kfold, ClassReport, ConfusionMatrix, CvOptions, CvReport,
    FoldPlan,
};
pub use features::{extract_ngrams, normalize, NgramRange, Norm, TfidfConfig, TfidfModel};
pub use pipeline::{FittedPipeline, PipelineConfig};
pub use resample::{smote, SmoteConfig};
pub use search::{compare_runs, enumerate, grid_search, GridPoint, GridSpec};
pub use sgd::{fit_binary, fit_multiclass, LinearModel, LossKind, Penalty, TrainConfig};
pub use sparse::SparseVector;
