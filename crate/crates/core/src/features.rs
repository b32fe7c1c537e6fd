//! N-gram counting and TF-IDF weighting.
//!
//! A term's raw value in a document is its in-document count multiplied by
//! its inverse document frequency:
//!
//! * plain:    `idf(t) = ln(n_docs / df(t)) + 1`
//! * smoothed: `idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1`
//! * disabled: `idf(t) = 1`
//!
//! and the resulting vector is then scaled to unit L2 or L1 norm (or left as is).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

pub const TFIDF_FORMAT_VERSION: u32 = 1;

/// Inclusive range of n-gram lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct NgramRange {
    lo: usize,
    hi: usize,
}

impl NgramRange {
    pub const UNIGRAMS: NgramRange = NgramRange { lo: 1, hi: 1 };

    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidConfig(format!("invalid n-gram range ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }
}

impl Default for NgramRange {
    fn default() -> Self {
        Self::UNIGRAMS
    }
}

impl TryFrom<(usize, usize)> for NgramRange {
    type Error = Error;

    fn try_from((lo, hi): (usize, usize)) -> Result<Self> {
        Self::new(lo, hi)
    }
}

impl From<NgramRange> for (usize, usize) {
    fn from(r: NgramRange) -> Self {
        (r.lo, r.hi)
    }
}

impl fmt::Display for NgramRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

impl FromStr for NgramRange {
    type Err = Error;

    /// Accepts `LO,HI` with optional surrounding parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let bad = || Error::InvalidConfig(format!("cannot parse n-gram range `{s}`"));
        let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        Self::new(lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
    None,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::None => "none",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "none" => Ok(Norm::None),
            _ => Err(Error::InvalidConfig(format!("unknown norm `{s}`"))),
        }
    }
}

/// Vectorizer settings tuned by the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfidfConfig {
    pub ngram_range: NgramRange,
    pub use_idf: bool,
    pub smooth_idf: bool,
    pub norm: Norm,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        Self { ngram_range: NgramRange::UNIGRAMS, use_idf: true, smooth_idf: true, norm: Norm::L2 }
    }
}

/// Every contiguous n-gram with length in `range`, shortest first, in
/// document order. Multi-token n-grams are joined with a single space.
pub fn extract_ngrams<S: AsRef<str>>(tokens: &[S], range: NgramRange) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.lo..=range.hi {
        if n > tokens.len() {
            break;
        }
        for window in tokens.windows(n) {
            let mut gram = String::from(window[0].as_ref());
            for t in &window[1..] {
                gram.push(' ');
                gram.push_str(t.as_ref());
            }
            out.push(gram);
        }
    }
    out
}

pub fn normalize(v: &SparseVector, norm: Norm) -> SparseVector {
    let denom = match norm {
        Norm::None => return v.clone(),
        Norm::L2 => v.squared_norm().sqrt(),
        Norm::L1 => v.l1_norm(),
    };
    if denom == 0.0 {
        return v.clone();
    }
    SparseVector::from_sorted_unchecked(v.iter().map(|(i, x)| (i, x / denom)).collect())
}

/// A fitted vocabulary with document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    config: TfidfConfig,
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<u64>,
    n_docs: u64,
    idf: Vec<f64>,
}

impl TfidfModel {
    /// Learns the vocabulary from training documents. Feature indices follow
    /// lexicographic order of the n-gram strings.
    pub fn fit<D: AsRef<[String]>>(documents: &[D], config: TfidfConfig) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        for doc in documents {
            let mut grams = extract_ngrams(doc.as_ref(), config.ngram_range);
            grams.sort_unstable();
            grams.dedup();
            for g in grams {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let (terms, doc_freq): (Vec<String>, Vec<u64>) = df.into_iter().unzip();
        Ok(Self::assemble(config, terms, doc_freq, documents.len() as u64))
    }

    fn assemble(config: TfidfConfig, terms: Vec<String>, doc_freq: Vec<u64>, n_docs: u64) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let idf = doc_freq.iter().map(|&df| idf_value(config, n_docs, df)).collect();
        Self { config, terms, index, doc_freq, n_docs, idf }
    }

    pub fn config(&self) -> TfidfConfig {
        self.config
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn doc_freq(&self) -> &[u64] {
        &self.doc_freq
    }

    pub fn vocabulary_len(&self) -> usize {
        self.terms.len()
    }

    pub fn feature_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self, feature: usize) -> Result<f64> {
        self.idf.get(feature).copied().ok_or(Error::UnknownFeature(feature))
    }

    /// Weighted, normalized vector for one document. Unknown n-grams are skipped.
    pub fn transform<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for gram in extract_ngrams(tokens, self.config.ngram_range) {
            if let Some(&j) = self.index.get(&gram) {
                *counts.entry(j).or_insert(0) += 1;
            }
        }
        let raw = SparseVector::from_pairs(counts.into_iter().map(|(j, c)| (j, c as f64 * self.idf[j])));
        normalize(&raw, self.config.norm)
    }

    pub fn transform_all<D: AsRef<[String]>>(&self, documents: &[D]) -> Vec<SparseVector> {
        documents.iter().map(|d| self.transform(d.as_ref())).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TfidfFile {
            version: TFIDF_FORMAT_VERSION,
            ngram_range: self.config.ngram_range,
            flags: Flags { use_idf: self.config.use_idf, smooth_idf: self.config.smooth_idf },
            norm: self.config.norm,
            n_docs: self.n_docs,
            vocabulary: self
                .terms
                .iter()
                .zip(&self.doc_freq)
                .enumerate()
                .map(|(i, (t, &df))| (t.clone(), i, df))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Decodes and validates a model written by [`TfidfModel::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TfidfFile = serde_json::from_str(text)?;
        if file.version != TFIDF_FORMAT_VERSION {
            return Err(Error::VersionMismatch { expected: TFIDF_FORMAT_VERSION, found: file.version });
        }
        if file.n_docs == 0 {
            return Err(Error::InvalidModel("n_docs must be positive".into()));
        }
        let mut terms = Vec::with_capacity(file.vocabulary.len());
        let mut doc_freq = Vec::with_capacity(file.vocabulary.len());
        for (pos, (term, index, df)) in file.vocabulary.into_iter().enumerate() {
            if index != pos {
                return Err(Error::InvalidModel(format!("vocabulary index {index} at position {pos}")));
            }
            if df == 0 || df > file.n_docs {
                return Err(Error::InvalidModel(format!(
                    "document frequency {df} for `{term}` outside 1..={}",
                    file.n_docs
                )));
            }
            if terms.last().is_some_and(|prev: &String| prev.as_str() >= term.as_str()) {
                return Err(Error::InvalidModel(format!("vocabulary not strictly sorted at `{term}`")));
            }
            terms.push(term);
            doc_freq.push(df);
        }
        let config = TfidfConfig {
            ngram_range: file.ngram_range,
            use_idf: file.flags.use_idf,
            smooth_idf: file.flags.smooth_idf,
            norm: file.norm,
        };
        Ok(Self::assemble(config, terms, doc_freq, file.n_docs))
    }
}

fn idf_value(config: TfidfConfig, n_docs: u64, df: u64) -> f64 {
    match (config.use_idf, config.smooth_idf) {
        (false, _) => 1.0,
        (true, false) => (n_docs as f64 / df as f64).ln() + 1.0,
        (true, true) => ((1 + n_docs) as f64 / (1 + df) as f64).ln() + 1.0,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TfidfFile {
    version: u32,
    ngram_range: NgramRange,
    flags: Flags,
    norm: Norm,
    n_docs: u64,
    vocabulary: Vec<(String, usize, u64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Flags {
    use_idf: bool,
    smooth_idf: bool,
}
