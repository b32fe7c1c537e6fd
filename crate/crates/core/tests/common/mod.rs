#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgdtext::SparseVector;

pub const NOISE: [&str; 24] = [
    "report",
    "police",
    "town",
    "village",
    "people",
    "group",
    "local",
    "area",
    "official",
    "claimed",
    "responsibility",
    "incident",
    "region",
    "province",
    "district",
    "near",
    "market",
    "road",
    "victims",
    "sources",
    "security",
    "forces",
    "residents",
    "building",
];

pub const SIGNATURES: [&str; 9] =
    ["assassin", "gunfire", "detonated", "hijacked", "barricaded", "kidnapped", "sabotage", "beaten", "unclear"];

fn noise(rng: &mut ChaCha8Rng, len: usize) -> Vec<String> {
    (0..len).map(|_| NOISE[rng.gen_range(0..NOISE.len())].to_string()).collect()
}

/// `per_class` documents for each of `classes` labels (1-based). Every
/// document holds its class's signature token three times, scattered among
/// four to eight shared noise words. A single occurrence is not enough for
/// the zero-margin perceptron: the noise words are individually rarer than
/// the signatures, so their idf outweighs a lone signature.
pub fn separable_corpus(classes: usize, per_class: usize, seed: u64) -> (Vec<Vec<String>>, Vec<u32>) {
    assert!(classes <= SIGNATURES.len(), "at most {} classes", SIGNATURES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for (c, signature) in SIGNATURES.iter().enumerate().take(classes) {
        for _ in 0..per_class {
            let len = rng.gen_range(4..9);
            let mut doc = noise(&mut rng, len);
            for _ in 0..3 {
                let at = rng.gen_range(0..=doc.len());
                doc.insert(at, signature.to_string());
            }
            docs.push(doc);
            labels.push(c as u32 + 1);
        }
    }
    (docs, labels)
}

/// Two classes with identical unigram statistics: class 0 contains the pair
/// `alpha beta`, class 1 the pair `beta alpha`, both embedded in shared noise.
pub fn bigram_corpus(per_class: usize, seed: u64) -> (Vec<Vec<String>>, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for i in 0..2 * per_class {
        let class = (i % 2) as u32;
        let mut doc = noise(&mut rng, 3);
        let pair = if class == 0 { ["alpha", "beta"] } else { ["beta", "alpha"] };
        doc.extend(pair.iter().map(|s| s.to_string()));
        doc.extend(noise(&mut rng, 3));
        docs.push(doc);
        labels.push(class);
    }
    (docs, labels)
}

/// Two large classes and one tiny one that only differs from class 1 by a
/// single extra token.
pub fn skewed_corpus(big: usize, tiny: usize, seed: u64) -> (Vec<Vec<String>>, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a_words = &NOISE[..12];
    let b_words = &NOISE[12..];
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    let draw = |rng: &mut ChaCha8Rng, pool: &[&str], n: usize| -> Vec<String> {
        (0..n).map(|_| pool[rng.gen_range(0..pool.len())].to_string()).collect()
    };
    for _ in 0..big {
        docs.push(draw(&mut rng, a_words, 6));
        labels.push(1);
        docs.push(draw(&mut rng, b_words, 6));
        labels.push(2);
    }
    for _ in 0..tiny {
        let mut d = draw(&mut rng, a_words, 6);
        d.push("cobalt".into());
        docs.push(d);
        labels.push(3);
    }
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng);
    (order.iter().map(|&i| docs[i].clone()).collect(), order.iter().map(|&i| labels[i]).collect())
}

/// Random sparse vectors around a per-class centre.
pub fn clustered_vectors(counts: &[usize], dim: usize, seed: u64) -> (Vec<SparseVector>, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::new();
    let mut labels = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        let centre: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        for _ in 0..n {
            let mut pairs = Vec::new();
            for (j, &mid) in centre.iter().enumerate() {
                if rng.gen_bool(0.6) {
                    pairs.push((j, mid + rng.gen_range(-1.0..1.0)));
                }
            }
            xs.push(SparseVector::from_pairs(pairs));
            labels.push(c as u32);
        }
    }
    (xs, labels)
}

/// Dense Gaussian-ish features with labels from a noisy linear rule.
pub fn logistic_problem(n: usize, dim: usize, seed: u64) -> (Vec<SparseVector>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..n {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let score: f64 = x.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.5..0.5);
        xs.push(SparseVector::from_dense(&x));
        ys.push(if score > 0.0 { 1.0 } else { -1.0 });
    }
    (xs, ys)
}

pub fn accuracy(truth: &[u32], predicted: &[u32]) -> f64 {
    truth.iter().zip(predicted).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}
