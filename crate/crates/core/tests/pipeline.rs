mod common;

use std::io::Cursor;

use sgdtext::corpus::read_corpus;
use sgdtext::evaluation::Metric;
use sgdtext::pipeline::FittedPipeline;
use sgdtext::{
    compare_runs, cross_validate, grid_search, stratified_kfold, CvOptions, Error, GridSpec, LabeledCorpus,
    LinearModel, LossKind, NgramRange, Norm, Penalty, PipelineConfig, Schema, StopWords, TfidfModel, TrainConfig,
};

fn config(loss: LossKind) -> PipelineConfig {
    PipelineConfig { train: TrainConfig { loss, ..Default::default() }, ..Default::default() }
}

#[test]
fn separable_corpus_cross_validates_perfectly() {
    let (docs, labels) = common::separable_corpus(4, 10, 1);
    for loss in LossKind::ALL {
        let r = cross_validate(&docs, &labels, &config(loss), 5, 0, &CvOptions::default()).unwrap();
        assert_eq!(r.fold_scores, vec![1.0; 5], "{loss:?}");
        assert_eq!((r.mean, r.std), (1.0, 0.0));
        assert_eq!(r.timing.fold_seconds.len(), 5);
        assert_eq!(r.summary(), "1.00000 (+/- 0.00000)");
    }
}

#[test]
fn cross_validation_is_deterministic() {
    let (docs, labels) = common::skewed_corpus(30, 4, 2);
    let a = cross_validate(&docs, &labels, &config(LossKind::Log), 4, 9, &CvOptions::default()).unwrap();
    let b = cross_validate(&docs, &labels, &config(LossKind::Log), 4, 9, &CvOptions::default()).unwrap();
    assert_eq!(a.fold_scores, b.fold_scores);
}

#[test]
fn fold_error_names_the_fold() {
    // One class with a single member: the fold that holds it trains on one class.
    let (mut docs, mut labels) = common::separable_corpus(1, 9, 3);
    docs.push(vec!["lonely".into()]);
    labels.push(2);
    let plan = stratified_kfold(&labels, 2, 0).unwrap();
    let expected = (0..2).find(|&f| plan.test_indices(f).contains(&9)).unwrap();
    let err = cross_validate(&docs, &labels, &config(LossKind::Hinge), 2, 0, &CvOptions::default()).unwrap_err();
    match err {
        Error::Fold { fold, source } => {
            assert_eq!(fold, expected);
            assert!(matches!(*source, Error::SingleClass(1)), "{source}");
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn resubstitution_is_at_least_honest_score() {
    let (docs, labels) = common::skewed_corpus(40, 6, 4);
    let honest = cross_validate(&docs, &labels, &config(LossKind::Hinge), 5, 1, &CvOptions::default()).unwrap();
    let resub = CvOptions { resubstitution: true, ..CvOptions::default() };
    let optimistic = cross_validate(&docs, &labels, &config(LossKind::Hinge), 5, 1, &resub).unwrap();
    assert!(optimistic.mean >= honest.mean, "{} < {}", optimistic.mean, honest.mean);
}

#[test]
fn comparing_a_config_with_itself_gives_zero_delta() {
    let (docs, labels) = common::separable_corpus(3, 8, 5);
    let cfg = config(LossKind::Log);
    let c = compare_runs(&docs, &labels, &cfg, &cfg, 4, 2, &CvOptions::default()).unwrap();
    assert_eq!(c.mean_delta, 0.0);
    assert_eq!(c.default.fold_scores, c.tuned.fold_scores);
}

#[test]
fn single_point_grid_has_one_ranked_candidate() {
    let (docs, labels) = common::separable_corpus(3, 10, 6);
    let spec = GridSpec {
        ngram_ranges: vec![NgramRange::UNIGRAMS],
        norms: vec![Norm::L2],
        use_idf: vec![true],
        smooth_idf: vec![true],
        penalties: vec![Penalty::L2],
        alphas: vec![1e-4],
        ..GridSpec::default()
    };
    let report = grid_search(&docs, &labels, &PipelineConfig::default(), &spec, Metric::Accuracy).unwrap();
    assert_eq!(report.candidates.len(), 1);
    let c = &report.candidates[0];
    assert_eq!((c.rank, c.index), (1, 0));
    assert_eq!(c.params.to_string(), "(1,1),'l2',True,True,'l2',0.0001");
    assert_eq!(report.dev_size, 15);
}

#[test]
fn failing_candidates_rank_last() {
    let (docs, labels) = common::separable_corpus(3, 10, 6);
    // An inner fold count larger than the dev set makes every candidate fail.
    let spec = GridSpec { alphas: vec![1e-4], inner_folds: 100, ..GridSpec::default() };
    let report = grid_search(&docs, &labels, &PipelineConfig::default(), &spec, Metric::Accuracy).unwrap();
    assert!(report.winner().is_none());
    assert!(report.candidates.iter().all(|c| c.error.is_some() && c.mean.is_none()));
}

#[test]
fn bigram_features_separate_word_order() {
    let (docs, labels) = common::bigram_corpus(20, 7);
    let unigram = cross_validate(&docs, &labels, &PipelineConfig::default(), 5, 0, &CvOptions::default()).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.tfidf.ngram_range = NgramRange::new(1, 2).unwrap();
    let bigram = cross_validate(&docs, &labels, &cfg, 5, 0, &CvOptions::default()).unwrap();
    assert!(bigram.mean > 0.9, "{}", bigram.mean);
    assert!(unigram.mean < 0.75, "{}", unigram.mean);
}

#[test]
fn fitted_pipeline_survives_json_round_trip() {
    let (docs, labels) = common::skewed_corpus(20, 5, 8);
    let fitted = FittedPipeline::fit(&docs, &labels, &config(LossKind::Log)).unwrap();
    let tfidf = TfidfModel::from_json(&fitted.tfidf.to_json().unwrap()).unwrap();
    let model = LinearModel::from_json(&fitted.model.to_json().unwrap()).unwrap();
    let restored = FittedPipeline { tfidf, model };
    assert_eq!(restored.predict(&docs).unwrap(), fitted.predict(&docs).unwrap());
    assert_eq!(restored, fitted);
}

#[test]
fn csv_to_jsonl_round_trip() {
    let csv = "label,text\n1,Bomb exploded near the market.\n2,nan\n2,Gunmen opened fire\n1,   \n3,\"Kidnapped, two workers\"\n";
    let loaded = read_corpus(Cursor::new(csv), &Schema::generic(), &StopWords::english()).unwrap();
    assert_eq!(loaded.dropped, 2);
    assert_eq!(loaded.corpus.labels, vec![1, 2, 3]);
    assert_eq!(loaded.corpus.documents[0], vec!["bomb", "exploded", "near", "market"]);
    let mut buf = Vec::new();
    loaded.corpus.write_jsonl(&mut buf).unwrap();
    let back = LabeledCorpus::read_jsonl(Cursor::new(buf), loaded.corpus.label_names.clone()).unwrap();
    assert_eq!(back, loaded.corpus);
}

#[test]
fn corpus_and_stop_words_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    let stop = dir.path().join("stop.txt");
    std::fs::write(&csv, "text,label\nThe Market burned,4\n").unwrap();
    std::fs::write(&stop, "# custom list\nmarket\n").unwrap();
    let words = StopWords::load(&stop).unwrap();
    let loaded = sgdtext::load_corpus(&csv, &Schema::generic(), &words).unwrap();
    assert_eq!(loaded.corpus.documents, vec![vec!["the", "burned"]]);
    let missing = dir.path().join("absent.csv");
    assert!(matches!(
        sgdtext::load_corpus(&missing, &Schema::generic(), &words),
        Err(Error::MissingFile(p)) if p == missing
    ));
}
