mod common;

use std::collections::{BTreeMap, HashSet};

use proptest::prelude::*;
use sgdtext::corpus::histogram;
use sgdtext::evaluation::Metric;
use sgdtext::resample::interpolate;
use sgdtext::search::format_float;
use sgdtext::{
    clean_text, confusion, enumerate, extract_ngrams, grid_search, normalize, per_class_metrics, smote, split,
    stratified_kfold, ConfusionMatrix, GridSpec, NgramRange, Norm, Penalty, PipelineConfig, SmoteConfig, SparseVector,
    StopWords, TfidfConfig, TfidfModel,
};

fn sparse_vector() -> impl Strategy<Value = SparseVector> {
    prop::collection::vec((0usize..50, -100.0f64..100.0), 0..20).prop_map(SparseVector::from_pairs)
}

fn token_docs() -> impl Strategy<Value = Vec<Vec<String>>> {
    let token = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]).prop_map(String::from);
    prop::collection::vec(prop::collection::vec(token, 1..8), 1..12)
}

fn labels(max_classes: u32, max_len: usize) -> impl Strategy<Value = Vec<u32>> {
    (1..=max_classes).prop_flat_map(move |c| prop::collection::vec(0..c, 2..max_len))
}

/// Independent brute-force neighbour list: sort by (distance, index).
fn brute_force_neighbors(points: &[SparseVector], query: usize, k: usize) -> Vec<usize> {
    let dense = |v: &SparseVector, dim: usize| {
        let mut d = vec![0.0; dim];
        for (j, x) in v.iter() {
            d[j] = x;
        }
        d
    };
    let dim = points.iter().filter_map(SparseVector::max_index).max().map_or(0, |m| m + 1);
    let q = dense(&points[query], dim);
    let mut scored: Vec<(f64, usize)> = (0..points.len())
        .filter(|&i| i != query)
        .map(|i| (dense(&points[i], dim).iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, i)| i).collect()
}

proptest! {
    #[test]
    fn clean_text_yields_lowercase_letters_without_stop_words(raw in ".{0,200}") {
        let stop = StopWords::english();
        for token in clean_text(&raw, &stop) {
            prop_assert!(!token.is_empty());
            prop_assert!(token.bytes().all(|b| b.is_ascii_lowercase()), "{token:?}");
            prop_assert!(!stop.contains(&token));
        }
    }

    #[test]
    fn split_partitions_and_stratifies(labels in labels(6, 300), fraction in 0.05f64..0.95, seed: u64) {
        prop_assume!(histogram(&labels).values().any(|&c| c >= 2));
        let plan = split(&labels, fraction, seed).unwrap();
        let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        let train_labels: Vec<u32> = plan.train_indices.iter().map(|&i| labels[i]).collect();
        let train_hist = histogram(&train_labels);
        for (label, count) in histogram(&labels) {
            let got = *train_hist.get(&label).unwrap_or(&0) as f64;
            prop_assert!((got - fraction * count as f64).abs() <= 1.0, "class {label}: {got} of {count}");
        }
    }

    #[test]
    fn normalize_identities(v in sparse_vector()) {
        let l2 = normalize(&v, Norm::L2);
        let l1 = normalize(&v, Norm::L1);
        if v.is_empty() {
            prop_assert!(l2.is_empty() && l1.is_empty());
        } else {
            prop_assert!((l2.squared_norm() - 1.0).abs() < 1e-12);
            prop_assert!((l1.l1_norm() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(normalize(&v, Norm::None), v);
    }

    #[test]
    fn idf_is_at_least_one_and_decreasing_in_df(docs in token_docs(), smooth: bool) {
        let cfg = TfidfConfig { smooth_idf: smooth, ..TfidfConfig::default() };
        let model = TfidfModel::fit(&docs, cfg).unwrap();
        let df = model.doc_freq();
        for a in 0..df.len() {
            let ia = model.idf(a).unwrap();
            prop_assert!(ia >= 1.0);
            for b in 0..df.len() {
                if df[a] <= df[b] {
                    prop_assert!(ia >= model.idf(b).unwrap());
                }
            }
        }
    }

    #[test]
    fn transform_keeps_every_training_ngram(docs in token_docs(), hi in 1usize..4, norm in prop::sample::select(vec![Norm::L1, Norm::L2, Norm::None])) {
        let range = NgramRange::new(1, hi).unwrap();
        let model = TfidfModel::fit(&docs, TfidfConfig { ngram_range: range, norm, ..TfidfConfig::default() }).unwrap();
        for doc in &docs {
            let grams: HashSet<String> = extract_ngrams(doc, range).into_iter().collect();
            let v = model.transform(doc);
            prop_assert_eq!(v.nnz(), grams.len());
            for g in grams {
                prop_assert!(v.get(model.feature_index(&g).unwrap()) > 0.0);
            }
        }
    }

    #[test]
    fn raw_counts_without_idf_or_norm(docs in token_docs()) {
        let cfg = TfidfConfig { use_idf: false, norm: Norm::None, ..TfidfConfig::default() };
        let model = TfidfModel::fit(&docs, cfg).unwrap();
        for doc in &docs {
            let v = model.transform(doc);
            for (j, x) in v.iter() {
                let term = model.term(j).unwrap();
                prop_assert_eq!(x, doc.iter().filter(|t| *t == term).count() as f64);
            }
        }
    }

    #[test]
    fn ngram_count_formula(len in 0usize..30, lo in 1usize..4, extra in 0usize..3) {
        let tokens: Vec<String> = (0..len).map(|i| format!("t{i}")).collect();
        let range = NgramRange::new(lo, lo + extra).unwrap();
        let expected: usize = (lo..=lo + extra).map(|n| (len + 1).saturating_sub(n)).sum();
        prop_assert_eq!(extract_ngrams(&tokens, range).len(), expected);
    }

    #[test]
    fn smote_invariants(counts in prop::collection::vec(1usize..15, 2..4), seed: u64, k in 1usize..6) {
        let (xs, labels) = common::clustered_vectors(&counts, 6, seed);
        let out = smote(&xs, &labels, &SmoteConfig { k_neighbors: k, seed }).unwrap();
        let majority = *counts.iter().max().unwrap();
        for (_, c) in histogram(&out.labels) {
            prop_assert_eq!(c, majority);
        }
        prop_assert_eq!(&out.vectors[..xs.len()], &xs[..]);
        prop_assert_eq!(&out.labels[..labels.len()], &labels[..]);
        for (s, origin) in out.origins.iter().enumerate() {
            let produced = &out.vectors[xs.len() + s];
            let label = out.labels[xs.len() + s];
            prop_assert_eq!(labels[origin.base], label);
            prop_assert_eq!(produced, &interpolate(&xs[origin.base], &xs[origin.neighbor], origin.gap));
            prop_assert!((0.0..1.0).contains(&origin.gap) || origin.base == origin.neighbor);
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
            if members.len() > 1 {
                let points: Vec<SparseVector> = members.iter().map(|&i| xs[i].clone()).collect();
                let local = members.iter().position(|&i| i == origin.base).unwrap();
                let allowed: Vec<usize> = brute_force_neighbors(&points, local, k).into_iter().map(|i| members[i]).collect();
                prop_assert!(allowed.contains(&origin.neighbor));
            }
        }
    }

    #[test]
    fn confusion_identities(truth in prop::collection::vec(0u32..5, 1..200), noise in prop::collection::vec(0u32..5, 200)) {
        let predicted: Vec<u32> = truth.iter().zip(&noise).map(|(&t, &n)| if n < 2 { t } else { n }).collect();
        let classes: Vec<u32> = (0..5).collect();
        let cm = confusion(&truth, &predicted, &classes).unwrap();
        let r = per_class_metrics(&cm).unwrap();
        let acc = cm.trace() as f64 / cm.total() as f64;
        prop_assert!((r.accuracy - acc).abs() < 1e-12);
        prop_assert!((r.micro_avg.recall - acc).abs() < 1e-12);
        prop_assert!((r.weighted_avg.recall - acc).abs() < 1e-12);
        prop_assert_eq!(r.per_class.iter().map(|c| c.support).sum::<u64>(), cm.total());
    }

    #[test]
    fn kfold_partitions_and_stratifies(labels in labels(10, 2000), k in 2usize..11, seed: u64) {
        prop_assume!(labels.len() >= k);
        let plan = stratified_kfold(&labels, k, seed).unwrap();
        let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        let totals = histogram(&labels);
        for fold in &plan.folds {
            let fold_labels: Vec<u32> = fold.iter().map(|&i| labels[i]).collect();
            let h = histogram(&fold_labels);
            for (label, &n) in &totals {
                let got = *h.get(label).unwrap_or(&0) as f64;
                prop_assert!((got - n as f64 / k as f64).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn enumeration_size_is_axis_product(
        ngrams in 1usize..3, norms in 1usize..4, idf in 1usize..3, smooth in 1usize..3, penalties in 1usize..3, alphas in 1usize..5,
    ) {
        let spec = GridSpec {
            ngram_ranges: (1..=ngrams).map(|hi| NgramRange::new(1, hi).unwrap()).collect(),
            norms: [Norm::L1, Norm::L2, Norm::None][..norms].to_vec(),
            use_idf: [true, false][..idf].to_vec(),
            smooth_idf: [true, false][..smooth].to_vec(),
            penalties: [Penalty::L1, Penalty::L2][..penalties].to_vec(),
            alphas: (0..alphas).map(|i| 10f64.powi(-(i as i32) - 2)).collect(),
            ..GridSpec::default()
        };
        let points = enumerate(&spec).unwrap();
        prop_assert_eq!(points.len(), ngrams * norms * idf * smooth * penalties * alphas);
        prop_assert_eq!(points.len(), spec.candidate_count());
        let distinct: HashSet<String> = points.iter().map(|p| p.to_string()).collect();
        prop_assert_eq!(distinct.len(), points.len());
    }

    #[test]
    fn format_float_round_trips(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
}

#[test]
fn thousand_random_vectors_normalize_to_unit_norm() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let nnz = rng.gen_range(1..30);
        let v = SparseVector::from_pairs((0..nnz).map(|_| (rng.gen_range(0..1000), rng.gen_range(-10.0..10.0))));
        if v.is_empty() {
            continue;
        }
        assert!((normalize(&v, Norm::L2).squared_norm() - 1.0).abs() < 1e-12);
        assert!((normalize(&v, Norm::L1).l1_norm() - 1.0).abs() < 1e-12);
    }
    assert!(normalize(&SparseVector::new(), Norm::L2).is_empty());
}

#[test]
fn confusion_from_counts_matches_matrix() {
    let cm = ConfusionMatrix { classes: vec![1, 2], counts: vec![vec![3, 1], vec![2, 4]] };
    let r = per_class_metrics(&cm).unwrap();
    assert!((r.weighted_avg.recall - 0.7).abs() < 1e-12);
}

/// Restricting the grid to a subset that still contains the winner cannot
/// change the winner: each candidate's score is independent of the others.
#[test]
fn grid_winner_survives_restriction() {
    let (docs, labels) = common::bigram_corpus(15, 3);
    let spec = GridSpec {
        ngram_ranges: vec![NgramRange::UNIGRAMS, NgramRange::new(1, 2).unwrap()],
        norms: vec![Norm::L2],
        use_idf: vec![true, false],
        smooth_idf: vec![true],
        penalties: vec![Penalty::L2],
        alphas: vec![1e-3, 1e-4],
        inner_folds: 3,
        dev_fraction: 1.0,
        seed: 5,
    };
    let base = PipelineConfig::default();
    let full = grid_search(&docs, &labels, &base, &spec, Metric::Accuracy).unwrap();
    let winner = full.winner().unwrap().params;
    let narrowed = GridSpec { alphas: vec![winner.alpha], ..spec.clone() };
    let sub = grid_search(&docs, &labels, &base, &narrowed, Metric::Accuracy).unwrap();
    let scores: BTreeMap<String, f64> =
        full.candidates.iter().map(|c| (c.params.to_string(), c.mean.unwrap())).collect();
    for c in &sub.candidates {
        assert_eq!(c.mean.unwrap(), scores[&c.params.to_string()]);
    }
    assert_eq!(sub.winner().unwrap().params.to_string(), winner.to_string());
}
