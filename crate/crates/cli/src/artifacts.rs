//! On-disk layout of a prepared experiment directory.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sgdtext::{Error, LabeledCorpus, LinearModel, TfidfModel};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TFIDF_FILE: &str = "tfidf.json";
pub const MODEL_FILE: &str = "model.json";
pub const TRAIN_FILE: &str = "train.json";

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub label: u32,
    pub name: String,
    pub train: usize,
    pub test: usize,
}

/// Everything later subcommands need to know about a prepared corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub schema: String,
    pub seed: u64,
    pub train_fraction: f64,
    pub n_documents: usize,
    pub drop_count: usize,
    pub label_names: BTreeMap<u32, String>,
    pub histogram: Vec<HistogramRow>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl Manifest {
    pub fn from_json(text: &str) -> sgdtext::Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::VersionMismatch { expected: MANIFEST_VERSION, found: m.version });
        }
        let mut seen = vec![false; m.n_documents];
        for &i in m.train_indices.iter().chain(&m.test_indices) {
            match seen.get_mut(i) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::InvalidConfig(format!("manifest index {i} is out of range or repeated"))),
            }
        }
        Ok(m)
    }
}

/// Fails with [`Error::MissingFile`] before any work starts.
pub fn require(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()).into());
    }
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e).into())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

/// The prepared corpus and its manifest.
pub struct Prepared {
    pub corpus: LabeledCorpus,
    pub manifest: Manifest,
}

impl Prepared {
    pub fn paths(dir: &Path) -> [PathBuf; 2] {
        [dir.join(CORPUS_FILE), dir.join(MANIFEST_FILE)]
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let [corpus_path, manifest_path] = Self::paths(dir);
        let manifest = Manifest::from_json(&read_text(&manifest_path)?)
            .with_context(|| format!("reading {}", manifest_path.display()))?;
        let file = File::open(&corpus_path).map_err(|e| Error::io(&corpus_path, e))?;
        let corpus = LabeledCorpus::read_jsonl(BufReader::new(file), manifest.label_names.clone())
            .with_context(|| format!("reading {}", corpus_path.display()))?;
        if corpus.len() != manifest.n_documents {
            return Err(Error::LengthMismatch { left: corpus.len(), right: manifest.n_documents })
                .with_context(|| format!("{} does not match {}", corpus_path.display(), manifest_path.display()));
        }
        Ok(Self { corpus, manifest })
    }

    pub fn part(&self, indices: &[usize]) -> (Vec<&Vec<String>>, Vec<u32>) {
        sgdtext::pipeline::subset(&self.corpus.documents, &self.corpus.labels, indices)
    }

    pub fn train(&self) -> (Vec<&Vec<String>>, Vec<u32>) {
        self.part(&self.manifest.train_indices)
    }

    pub fn test(&self) -> (Vec<&Vec<String>>, Vec<u32>) {
        self.part(&self.manifest.test_indices)
    }
}

pub fn load_tfidf(dir: &Path) -> Result<TfidfModel> {
    let path = dir.join(TFIDF_FILE);
    TfidfModel::from_json(&read_text(&path)?).with_context(|| format!("reading {}", path.display()))
}

pub fn load_model(dir: &Path) -> Result<LinearModel> {
    let path = dir.join(MODEL_FILE);
    LinearModel::from_json(&read_text(&path)?).with_context(|| format!("reading {}", path.display()))
}
