//! Vectorize → optional SMOTE → one-vs-rest SGD, fitted on training documents only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{TfidfConfig, TfidfModel};
use crate::resample::{smote, SmoteConfig};
use crate::sgd::{fit_multiclass_dim, LinearModel, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub tfidf: TfidfConfig,
    pub train: TrainConfig,
    /// Oversample the training documents after vectorization.
    pub smote: Option<SmoteConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub tfidf: TfidfModel,
    pub model: LinearModel,
}

impl FittedPipeline {
    pub fn fit<D: AsRef<[String]>>(documents: &[D], labels: &[u32], config: &PipelineConfig) -> Result<Self> {
        if documents.len() != labels.len() {
            return Err(Error::LengthMismatch { left: documents.len(), right: labels.len() });
        }
        let tfidf = TfidfModel::fit(documents, config.tfidf)?;
        let xs = tfidf.transform_all(documents);
        let dim = tfidf.vocabulary_len();
        let model = match &config.smote {
            Some(smote_cfg) => {
                let balanced = smote(&xs, labels, smote_cfg)?;
                fit_multiclass_dim(&balanced.vectors, &balanced.labels, dim, &config.train)?
            }
            None => fit_multiclass_dim(&xs, labels, dim, &config.train)?,
        };
        Ok(Self { tfidf, model })
    }

    pub fn predict<D: AsRef<[String]>>(&self, documents: &[D]) -> Result<Vec<u32>> {
        documents.iter().map(|d| self.model.predict(&self.tfidf.transform(d.as_ref()))).collect()
    }
}

/// Borrows the documents and copies the labels at `indices`.
pub fn subset<'a, D>(documents: &'a [D], labels: &[u32], indices: &[usize]) -> (Vec<&'a D>, Vec<u32>) {
    indices.iter().map(|&i| (&documents[i], labels[i])).unzip()
}
