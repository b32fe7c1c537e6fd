mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use sgdtext::evaluation::{Metric, StdKind};
use sgdtext::{LossKind, NgramRange, Norm, Penalty, PipelineConfig, SmoteConfig, TfidfConfig, TrainConfig};

/// TF-IDF + one-vs-rest SGD text classification experiments.
#[derive(Debug, Parser)]
#[command(name = "sgdtext", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed; split, folds, shuffling, SMOTE and grid search draw labelled streams from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for folds and grid candidates (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a CSV export and write the corpus, split manifest and class table.
    Prepare(PrepareArgs),
    /// Fit the vectorizer and classifier on the training split.
    Train(TrainArgs),
    /// Score a trained model on the test (or training) split.
    Eval(EvalArgs),
    /// Stratified k-fold cross-validation on the training split.
    Crossval(CrossvalArgs),
    /// Grid search over the pipeline hyperparameters on a development subset.
    Gridsearch(GridsearchArgs),
    /// Default versus tuned configuration on the held-out test split.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct PrepareArgs {
    /// Input CSV file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemaKind::Generic)]
    schema: SchemaKind,
    /// Stop-word list, one word per line (defaults to the built-in English list).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Fraction of documents in the training split.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemaKind {
    /// Columns `label` and `text`.
    Generic,
    /// Global Terrorism Database: `attacktype1` and `summary`.
    Gtd,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Directory holding corpus.jsonl and manifest.json (defaults to --out).
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct PipelineArgs {
    #[arg(long, default_value = "svm")]
    loss: LossKind,
    /// N-gram range as LO,HI.
    #[arg(long, default_value = "1,1")]
    ngram: NgramRange,
    #[arg(long, default_value = "l2")]
    norm: Norm,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    use_idf: bool,
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    smooth_idf: bool,
    #[arg(long, default_value = "l2")]
    penalty: Penalty,
    #[arg(long, default_value_t = 1e-4)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Oversample minority classes with SMOTE before training.
    #[arg(long)]
    smote: bool,
    /// SMOTE neighbourhood size.
    #[arg(long, default_value_t = 5)]
    smote_k: usize,
}

impl PipelineArgs {
    fn config(&self, seed: u64) -> PipelineConfig {
        PipelineConfig {
            tfidf: TfidfConfig {
                ngram_range: self.ngram,
                use_idf: self.use_idf,
                smooth_idf: self.smooth_idf,
                norm: self.norm,
            },
            train: TrainConfig {
                loss: self.loss,
                penalty: self.penalty,
                alpha: self.alpha,
                epochs: self.epochs,
                seed,
                ..TrainConfig::default()
            },
            smote: self.smote.then_some(SmoteConfig { k_neighbors: self.smote_k, seed }),
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Directory holding tfidf.json and model.json (defaults to --out).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Which split to score.
    #[arg(long, value_enum, default_value_t = Part::Test)]
    on: Part,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Part {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Accuracy,
    MacroF1,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Accuracy => Metric::Accuracy,
            MetricArg::MacroF1 => Metric::MacroF1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StdArg {
    Population,
    Sample,
}

impl From<StdArg> for StdKind {
    fn from(s: StdArg) -> Self {
        match s {
            StdArg::Population => StdKind::Population,
            StdArg::Sample => StdKind::Sample,
        }
    }
}

#[derive(Debug, Args)]
struct CrossvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Number of folds.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Run every loss instead of just --loss.
    #[arg(long)]
    all_losses: bool,
    #[arg(long, value_enum, default_value_t = MetricArg::Accuracy)]
    metric: MetricArg,
    #[arg(long, value_enum, default_value_t = StdArg::Population)]
    std: StdArg,
}

#[derive(Debug, Args)]
struct GridsearchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Grid specification JSON (defaults to the built-in 96-point grid).
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricArg::Accuracy)]
    metric: MetricArg,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Tuned configuration; the default side keeps only --loss, --epochs and the SMOTE flags.
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Take the tuned hyperparameters from a gridsearch.json winner instead of the flags.
    #[arg(long)]
    from_grid: Option<PathBuf>,
}

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<sgdtext::Error>()) else {
        return EXIT_DATA;
    };
    if e.is_numeric() {
        EXIT_NUMERIC
    } else if matches!(e, sgdtext::Error::InvalidConfig(_) | sgdtext::Error::EmptyAxis(_)) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
