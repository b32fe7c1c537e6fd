use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sgdtext::evaluation::{CvOptions, Metric};
use sgdtext::pipeline::FittedPipeline;
use sgdtext::report::{class_report_table, cv_table, histogram_table, search_table, summary_header, summary_row};
use sgdtext::search::SearchReport;
use sgdtext::{
    confusion, cross_validate, grid_search, load_corpus, per_class_metrics, split, ClassReport, ConfusionMatrix, Error,
    GridPoint, GridSpec, LossKind, PipelineConfig, Schema, StopWords,
};

use crate::artifacts::{
    create_dir, load_model, load_tfidf, read_text, require, write_json, write_text, HistogramRow, Manifest, Prepared,
    CORPUS_FILE, MANIFEST_FILE, MANIFEST_VERSION, MODEL_FILE, TFIDF_FILE, TRAIN_FILE,
};
use crate::{
    Cli, Command, CompareArgs, CrossvalArgs, DataArgs, EvalArgs, GridsearchArgs, Part, PrepareArgs, SchemaKind,
    TrainArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Prepare(a) => prepare(cli, a),
        Command::Train(a) => train(cli, a),
        Command::Eval(a) => eval(cli, a),
        Command::Crossval(a) => crossval(cli, a),
        Command::Gridsearch(a) => gridsearch(cli, a),
        Command::Compare(a) => compare(cli, a),
    }
}

fn data_dir<'a>(cli: &'a Cli, data: &'a DataArgs) -> &'a Path {
    data.data.as_deref().unwrap_or(&cli.out)
}

fn load_prepared(dir: &Path) -> Result<Prepared> {
    for path in Prepared::paths(dir) {
        require(&path)?;
    }
    Prepared::load(dir)
}

fn prepare(cli: &Cli, args: &PrepareArgs) -> Result<()> {
    require(&args.input)?;
    if let Some(path) = &args.stopwords {
        require(path)?;
    }
    let stop_words = match &args.stopwords {
        Some(path) => StopWords::load(path)?,
        None => StopWords::english(),
    };
    let (schema_name, schema) = match args.schema {
        SchemaKind::Generic => ("generic", Schema::generic()),
        SchemaKind::Gtd => ("gtd", Schema::gtd()),
    };
    let loaded =
        load_corpus(&args.input, &schema, &stop_words).with_context(|| format!("loading {}", args.input.display()))?;
    let corpus = loaded.corpus;
    let plan = split(&corpus.labels, args.split, cli.seed)?;

    let count = |indices: &[usize], label: u32| indices.iter().filter(|&&i| corpus.labels[i] == label).count();
    let histogram: Vec<HistogramRow> = corpus
        .classes()
        .into_iter()
        .map(|label| HistogramRow {
            label,
            name: corpus.label_name(label),
            train: count(&plan.train_indices, label),
            test: count(&plan.test_indices, label),
        })
        .collect();
    let table = histogram_table(&histogram.iter().map(|r| (r.name.clone(), r.train, r.test)).collect::<Vec<_>>());
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        schema: schema_name.into(),
        seed: cli.seed,
        train_fraction: args.split,
        n_documents: corpus.len(),
        drop_count: loaded.dropped,
        label_names: corpus.label_names.clone(),
        histogram,
        train_indices: plan.train_indices,
        test_indices: plan.test_indices,
    };

    create_dir(&cli.out)?;
    let corpus_path = cli.out.join(CORPUS_FILE);
    let file = File::create(&corpus_path).map_err(|e| Error::io(&corpus_path, e))?;
    let mut writer = BufWriter::new(file);
    corpus.write_jsonl(&mut writer)?;
    writer.flush().map_err(|e| Error::io(&corpus_path, e))?;
    write_json(&cli.out.join(MANIFEST_FILE), &manifest)?;
    write_text(&cli.out.join("table1.txt"), &table)?;
    print!("{table}");
    println!(
        "{} documents kept, {} dropped; train {} / test {}",
        manifest.n_documents,
        manifest.drop_count,
        manifest.train_indices.len(),
        manifest.test_indices.len()
    );
    Ok(())
}

fn train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let prepared = load_prepared(data_dir(cli, &args.data))?;
    let config = args.pipeline.config(cli.seed);
    let (docs, labels) = prepared.train();
    let started = Instant::now();
    let fitted = FittedPipeline::fit(&docs, &labels, &config).context("training")?;
    let seconds = started.elapsed().as_secs_f64();

    create_dir(&cli.out)?;
    write_text(&cli.out.join(TFIDF_FILE), &(fitted.tfidf.to_json()? + "\n"))?;
    write_text(&cli.out.join(MODEL_FILE), &(fitted.model.to_json()? + "\n"))?;
    write_json(
        &cli.out.join(TRAIN_FILE),
        &json!({
            "config": config,
            "params": GridPoint::of(&config).to_string(),
            "train_size": labels.len(),
            "vocabulary": fitted.tfidf.vocabulary_len(),
            "timing": { "seconds": seconds },
        }),
    )?;
    println!(
        "trained {} on {} documents, {} features, {} classes in {seconds:.2}s",
        config.train.loss.display_name(),
        labels.len(),
        fitted.tfidf.vocabulary_len(),
        fitted.model.classes().len()
    );
    Ok(())
}

/// Confusion matrix over the union of the model's classes and the true labels.
fn evaluate(classes: &[u32], truth: &[u32], predicted: &[u32]) -> Result<(ConfusionMatrix, ClassReport)> {
    let mut all: Vec<u32> = classes.iter().chain(truth).copied().collect();
    all.sort_unstable();
    all.dedup();
    let cm = confusion(truth, predicted, &all)?;
    let report = per_class_metrics(&cm)?;
    Ok((cm, report))
}

fn eval(cli: &Cli, args: &EvalArgs) -> Result<()> {
    let model_dir = args.model.as_deref().unwrap_or(&cli.out);
    let data = data_dir(cli, &args.data);
    for path in Prepared::paths(data).into_iter().chain([model_dir.join(TFIDF_FILE), model_dir.join(MODEL_FILE)]) {
        require(&path)?;
    }
    let fitted = FittedPipeline { tfidf: load_tfidf(model_dir)?, model: load_model(model_dir)? };
    let prepared = Prepared::load(data)?;
    let (docs, labels) = match args.on {
        Part::Train => prepared.train(),
        Part::Test => prepared.test(),
    };
    let started = Instant::now();
    let predicted = fitted.predict(&docs)?;
    let eval_seconds = started.elapsed().as_secs_f64();
    let (cm, report) = evaluate(fitted.model.classes(), &labels, &predicted)?;

    let train_info: Option<serde_json::Value> = match read_text(&model_dir.join(TRAIN_FILE)) {
        Ok(text) => serde_json::from_str(&text).ok(),
        Err(_) => None,
    };
    let train_seconds = train_info.as_ref().and_then(|v| v["timing"]["seconds"].as_f64());
    let loss = train_info
        .as_ref()
        .and_then(|v| v["config"]["train"]["loss"].as_str().map(str::to_owned))
        .and_then(|s| serde_json::from_value::<LossKind>(json!(s)).ok());
    let label = loss.map_or("Classifier", LossKind::display_name);

    let split_name = match args.on {
        Part::Train => "train",
        Part::Test => "test",
    };
    create_dir(&cli.out)?;
    write_json(
        &cli.out.join("report.json"),
        &json!({
            "split": split_name,
            "documents": labels.len(),
            "confusion": cm,
            "report": report,
            "timing": { "train_seconds": train_seconds, "eval_seconds": eval_seconds },
        }),
    )?;
    let table = class_report_table(&report, |l| prepared.corpus.label_name(l));
    write_text(&cli.out.join("report.txt"), &table)?;
    let summary =
        format!("{}\n{}\n", summary_header(), summary_row(label, &report, train_seconds.unwrap_or(0.0) + eval_seconds));
    write_text(&cli.out.join("summary.txt"), &summary)?;
    print!("{table}\n{summary}");
    Ok(())
}

#[derive(Serialize)]
struct CvRun {
    loss: LossKind,
    params: String,
    fold_scores: Vec<f64>,
    mean: f64,
    std: f64,
    summary: String,
}

fn crossval(cli: &Cli, args: &CrossvalArgs) -> Result<()> {
    let prepared = load_prepared(data_dir(cli, &args.data))?;
    let (docs, labels) = prepared.train();
    let options = CvOptions { metric: args.metric.into(), std: args.std.into(), ..CvOptions::default() };
    let losses = if args.all_losses { LossKind::ALL.to_vec() } else { vec![args.pipeline.loss] };

    let mut runs = Vec::new();
    let mut reports = Vec::new();
    for loss in losses {
        let mut config = args.pipeline.config(cli.seed);
        config.train.loss = loss;
        let report = cross_validate(&docs, &labels, &config, args.k, cli.seed, &options)
            .with_context(|| format!("cross-validating {loss}"))?;
        runs.push(CvRun {
            loss,
            params: GridPoint::of(&config).to_string(),
            fold_scores: report.fold_scores.clone(),
            mean: report.mean,
            std: report.std,
            summary: report.summary(),
        });
        reports.push((loss.display_name().to_string(), report));
    }
    let timing: Vec<_> = reports
        .iter()
        .map(|(name, r)| json!({ "loss": name, "fold_seconds": r.timing.fold_seconds, "total_seconds": r.timing.total_seconds }))
        .collect();
    let table = cv_table(&reports.iter().map(|(n, r)| (n.clone(), r)).collect::<Vec<_>>());

    create_dir(&cli.out)?;
    write_json(
        &cli.out.join("crossval.json"),
        &json!({
            "k": args.k,
            "seed": cli.seed,
            "metric": options.metric,
            "std": options.std,
            "runs": runs,
            "timing": { "runs": timing },
        }),
    )?;
    write_text(&cli.out.join("crossval.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn gridsearch(cli: &Cli, args: &GridsearchArgs) -> Result<()> {
    if let Some(path) = &args.grid {
        require(path)?;
    }
    let prepared = load_prepared(data_dir(cli, &args.data))?;
    let mut spec = match &args.grid {
        Some(path) => GridSpec::from_json(&read_text(path)?).with_context(|| format!("reading {}", path.display()))?,
        None => GridSpec::default(),
    };
    spec.seed = cli.seed;
    let base = args.pipeline.config(cli.seed);
    let (docs, labels) = prepared.train();
    let metric: Metric = args.metric.into();
    let report = grid_search(&docs, &labels, &base, &spec, metric)?;
    let table = search_table(&report);

    create_dir(&cli.out)?;
    write_json(&cli.out.join("gridsearch.json"), &report)?;
    write_text(&cli.out.join("gridsearch.txt"), &table)?;
    print!("{table}");
    match report.winner() {
        Some(w) => println!("best: {} with {:.5}", w.params, w.mean.unwrap_or(f64::NAN)),
        None => println!("every candidate failed"),
    }
    Ok(())
}

struct HeldOut {
    report: ClassReport,
    seconds: f64,
}

fn held_out(prepared: &Prepared, config: &PipelineConfig) -> Result<HeldOut> {
    let (train_docs, train_labels) = prepared.train();
    let (test_docs, test_labels) = prepared.test();
    let started = Instant::now();
    let fitted = FittedPipeline::fit(&train_docs, &train_labels, config)?;
    let predicted = fitted.predict(&test_docs)?;
    let seconds = started.elapsed().as_secs_f64();
    let (_, report) = evaluate(fitted.model.classes(), &test_labels, &predicted)?;
    Ok(HeldOut { report, seconds })
}

fn compare(cli: &Cli, args: &CompareArgs) -> Result<()> {
    if let Some(path) = &args.from_grid {
        require(path)?;
    }
    let prepared = load_prepared(data_dir(cli, &args.data))?;
    let flags = args.pipeline.config(cli.seed);
    let tuned = match &args.from_grid {
        Some(path) => {
            let search: SearchReport = serde_json::from_str(&read_text(path)?)
                .map_err(Error::from)
                .with_context(|| format!("reading {}", path.display()))?;
            let winner = search
                .winner()
                .ok_or_else(|| Error::InvalidConfig(format!("{} has no successful candidate", path.display())))?;
            winner.params.apply(&flags)
        }
        None => flags,
    };
    let mut default = PipelineConfig::default();
    default.train.loss = flags.train.loss;
    default.train.epochs = flags.train.epochs;
    default.train.seed = flags.train.seed;
    default.smote = flags.smote;

    let base = held_out(&prepared, &default).context("default configuration")?;
    let best = held_out(&prepared, &tuned).context("tuned configuration")?;
    let name = flags.train.loss.display_name();
    let side = |config: &PipelineConfig, r: &HeldOut| {
        json!({
            "params": GridPoint::of(config).to_string(),
            "config": config,
            "accuracy": r.report.accuracy,
            "weighted_avg": r.report.weighted_avg,
            "report": r.report,
        })
    };
    let table = format!(
        "{}\n{}\n{}\n\ndefault: {}\ntuned:   {}\n",
        summary_header(),
        summary_row(&format!("Default {name}"), &base.report, base.seconds),
        summary_row(&format!("Tuned {name}"), &best.report, best.seconds),
        GridPoint::of(&default),
        GridPoint::of(&tuned),
    );

    create_dir(&cli.out)?;
    write_json(
        &cli.out.join("compare.json"),
        &json!({
            "default": side(&default, &base),
            "tuned": side(&tuned, &best),
            "accuracy_delta": best.report.accuracy - base.report.accuracy,
            "timing": { "default_seconds": base.seconds, "tuned_seconds": best.seconds },
        }),
    )?;
    write_text(&cli.out.join("compare.txt"), &table)?;
    print!("{table}");
    Ok(())
}
