//! Loading, cleaning and splitting labeled text.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

const ENGLISH_STOP_WORDS: &str = include_str!("../data/stopwords_en.txt");

/// A set of lowercase tokens removed during cleaning.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled English list (Glasgow IR group).
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOP_WORDS)
    }

    /// One token per line; blank lines and `#` comments are skipped and
    /// entries are lowercased.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        Self(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Splits on every non-ASCII-letter character, lowercases, and drops stop words.
pub fn clean_text(raw: &str, stop_words: &StopWords) -> Vec<String> {
    raw.split(|c: char| !c.is_ascii_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_ascii_lowercase)
        .filter(|t| !stop_words.contains(t))
        .collect()
}

/// Column mapping for an input CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub label_column: String,
    pub text_column: String,
    /// Text values (compared case-insensitively after trimming) treated as null.
    pub null_sentinels: Vec<String>,
    /// Display names for known label codes.
    pub label_names: BTreeMap<u32, String>,
}

impl Schema {
    pub fn generic() -> Self {
        Self {
            label_column: "label".into(),
            text_column: "text".into(),
            null_sentinels: vec!["nan".into()],
            label_names: BTreeMap::new(),
        }
    }

    /// Global Terrorism Database export: `attacktype1` codes 1..9 and the `summary` narrative.
    pub fn gtd() -> Self {
        let names = [
            "Assassination",
            "Armed Assault",
            "Bombing/Explosion",
            "Hijacking",
            "Hostage Taking (Barricade Incident)",
            "Hostage Taking (Kidnapping)",
            "Facility/Infrastructure Attack",
            "Unarmed Assault",
            "Unknown",
        ];
        Self {
            label_column: "attacktype1".into(),
            text_column: "summary".into(),
            null_sentinels: vec!["nan".into()],
            label_names: names.iter().enumerate().map(|(i, n)| (i as u32 + 1, n.to_string())).collect(),
        }
    }

    fn is_null(&self, text: &str) -> bool {
        let t = text.trim();
        t.is_empty() || self.null_sentinels.iter().any(|s| s.eq_ignore_ascii_case(t))
    }
}

/// One input row before cleaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub label_code: u32,
    pub text: Option<String>,
}

/// Cleaned documents with their class ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub documents: Vec<Vec<String>>,
    pub labels: Vec<u32>,
    pub label_names: BTreeMap<u32, String>,
}

impl LabeledCorpus {
    /// Builds a corpus, enforcing the non-empty and lowercase-alphabetic token invariants.
    pub fn new(documents: Vec<Vec<String>>, labels: Vec<u32>, label_names: BTreeMap<u32, String>) -> Result<Self> {
        if documents.len() != labels.len() {
            return Err(Error::LengthMismatch { left: documents.len(), right: labels.len() });
        }
        for (i, doc) in documents.iter().enumerate() {
            if doc.is_empty() {
                return Err(Error::Line { line: i + 1, message: "document has no tokens".into() });
            }
            if let Some(bad) = doc.iter().find(|t| t.is_empty() || !t.bytes().all(|b| b.is_ascii_lowercase())) {
                return Err(Error::Line { line: i + 1, message: format!("token `{bad}` is not lowercase alphabetic") });
            }
        }
        Ok(Self { documents, labels, label_names })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<u32> {
        distinct_labels(&self.labels)
    }

    pub fn label_name(&self, label: u32) -> String {
        self.label_names.get(&label).cloned().unwrap_or_else(|| format!("class {label}"))
    }

    /// Writes one JSON object per document: `{"label": 3, "tokens": [...]}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (tokens, &label) in self.documents.iter().zip(&self.labels) {
            serde_json::to_writer(&mut out, &JsonlRecord { label, tokens: tokens.clone() })?;
            out.write_all(b"\n").map_err(|e| Error::io("<jsonl output>", e))?;
        }
        Ok(())
    }

    /// Reads the format produced by [`LabeledCorpus::write_jsonl`].
    pub fn read_jsonl<R: BufRead>(input: R, label_names: BTreeMap<u32, String>) -> Result<Self> {
        let mut documents = Vec::new();
        let mut labels = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<jsonl input>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: JsonlRecord =
                serde_json::from_str(&line).map_err(|e| Error::Line { line: n + 1, message: e.to_string() })?;
            documents.push(record.tokens);
            labels.push(record.label);
        }
        Self::new(documents, labels, label_names)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlRecord {
    label: u32,
    tokens: Vec<String>,
}

/// A loaded corpus together with how many input rows were discarded.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: LabeledCorpus,
    pub dropped: usize,
}

pub fn load_corpus(path: &Path, schema: &Schema, stop_words: &StopWords) -> Result<LoadedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), schema, stop_words)
}

/// Parses CSV from any reader. Rows whose text is null or cleans to nothing are dropped.
pub fn read_corpus<R: Read>(input: R, schema: &Schema, stop_words: &StopWords) -> Result<LoadedCorpus> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let label_col = column(&schema.label_column)?;
    let text_col = column(&schema.text_column)?;

    let mut documents = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0;
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let raw_label = row.get(label_col).unwrap_or("");
        let label_code =
            raw_label.trim().parse::<u32>().map_err(|_| Error::InvalidLabel { line, value: raw_label.to_string() })?;
        let record =
            RawRecord { label_code, text: row.get(text_col).filter(|t| !schema.is_null(t)).map(str::to_string) };
        let tokens = record.text.as_deref().map(|t| clean_text(t, stop_words)).unwrap_or_default();
        if tokens.is_empty() {
            dropped += 1;
            continue;
        }
        documents.push(tokens);
        labels.push(record.label_code);
    }

    let mut label_names = schema.label_names.clone();
    for label in distinct_labels(&labels) {
        label_names.entry(label).or_insert_with(|| format!("class {label}"));
    }
    Ok(LoadedCorpus { corpus: LabeledCorpus { documents, labels, label_names }, dropped })
}

/// Sorted distinct values.
pub fn distinct_labels(labels: &[u32]) -> Vec<u32> {
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes
}

/// Label → member positions, ascending by label.
pub(crate) fn members_by_class(labels: &[u32]) -> BTreeMap<u32, Vec<usize>> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups
}

/// Train/test partition of corpus positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub train_fraction: f64,
}

/// Stratified train/test split.
///
/// The overall train size is `round(train_fraction * N)`. Each class receives
/// the floor of its ideal share and the leftover slots go to the classes with
/// the largest fractional remainders (ties to the smaller label), so every
/// class is within one sample of its exact proportion. A class with a single
/// member is always kept on the training side.
pub fn split(labels: &[u32], train_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("train fraction {train_fraction} is not in (0, 1)")));
    }
    let n = labels.len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!("cannot split {n} samples")));
    }
    let groups = members_by_class(labels);
    if groups.values().all(|m| m.len() < 2) {
        return Err(Error::InvalidConfig("every class has a single member".into()));
    }

    let target = (train_fraction * n as f64).round() as usize;
    let mut quotas: Vec<(u32, usize, f64)> = groups
        .iter()
        .map(|(&label, members)| {
            let ideal = train_fraction * members.len() as f64;
            (label, ideal.floor() as usize, ideal - ideal.floor())
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.1).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].2.total_cmp(&quotas[a].2).then(quotas[a].0.cmp(&quotas[b].0)));
    for &i in order.iter().take(target.saturating_sub(assigned)) {
        quotas[i].1 += 1;
    }

    let mut rng = rng::stream(seed, Stream::Split);
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(n - target);
    for ((label, members), (_, quota, _)) in groups.into_iter().zip(quotas) {
        let mut members = members;
        members.shuffle(&mut rng);
        let quota = if members.len() == 1 && quota == 0 {
            log::warn!("class {label} has a single member; keeping it in the training split");
            1
        } else {
            quota
        };
        train.extend_from_slice(&members[..quota]);
        test.extend_from_slice(&members[quota..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { train_indices: train, test_indices: test, seed, train_fraction })
}

/// Per-label counts, ascending by label.
pub fn histogram(labels: &[u32]) -> BTreeMap<u32, usize> {
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts
}
