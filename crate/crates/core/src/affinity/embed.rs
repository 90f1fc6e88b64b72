//! Label embeddings: a deterministic character-trigram embedder that works
//! offline, and an HTTP client for an external sentence-embedding service.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use twox_hash::XxHash64;

use crate::coding::normalized_label_text;
use crate::error::{Error, Result};

/// Output dimension of the trigram embedder.
pub const TRIGRAM_DIM: usize = 256;
/// Seed of the trigram bucket hash.
pub const TRIGRAM_SEED: u64 = 0x5CA1_AB1E;
const BOUNDARY: char = '#';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingProviderKind {
    ExternalModel,
    TrigramFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEmbedding {
    /// Normalized label text.
    pub label: String,
    pub vector: Vec<f64>,
    pub provider: EmbeddingProviderKind,
    pub norm: f64,
}

/// Character trigrams of `#label#`, one per window of three scalar values.
pub fn trigrams(normalized: &str) -> Vec<String> {
    let padded: Vec<char> = std::iter::once(BOUNDARY)
        .chain(normalized.chars())
        .chain(std::iter::once(BOUNDARY))
        .collect();
    padded.windows(3).map(|w| w.iter().collect()).collect()
}

pub fn trigram_bucket(trigram: &str) -> usize {
    (XxHash64::oneshot(TRIGRAM_SEED, trigram.as_bytes()) % TRIGRAM_DIM as u64) as usize
}

pub(crate) fn l2_normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Hashed trigram-count embedding of a label, L2-normalized.
pub fn embed_label(label: &str) -> Result<LabelEmbedding> {
    let text = normalized_label_text(label);
    if text.is_empty() {
        return Err(Error::EmptyLabel);
    }
    let mut vector = vec![0.0; TRIGRAM_DIM];
    for t in trigrams(&text) {
        vector[trigram_bucket(&t)] += 1.0;
    }
    l2_normalize(&mut vector);
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(LabelEmbedding {
        label: text,
        vector,
        provider: EmbeddingProviderKind::TrigramFallback,
        norm,
    })
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingProviderConfig {
    pub kind: EmbeddingProviderKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model_name: String,
    #[serde(default)]
    pub credentials_env_var: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    30
}

impl Default for EmbeddingProviderConfig {
    fn default() -> Self {
        Self {
            kind: EmbeddingProviderKind::TrigramFallback,
            endpoint: None,
            model_name: String::new(),
            credentials_env_var: None,
            timeout_secs: default_timeout_secs(),
        }
    }
}

/// Client for an OpenAI-compatible `POST {endpoint}/embeddings` service.
#[derive(Debug, Clone)]
pub struct ExternalEmbedder {
    client: reqwest::Client,
    endpoint: String,
    model: String,
    credentials_env_var: Option<String>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
    #[serde(default)]
    index: Option<usize>,
}

impl ExternalEmbedder {
    pub fn from_config(cfg: &EmbeddingProviderConfig) -> Result<Self> {
        let endpoint = cfg
            .endpoint
            .clone()
            .ok_or_else(|| Error::Config("external embedding provider needs an endpoint".into()))?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs.max(1)))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: endpoint.trim_end_matches('/').to_owned(),
            model: cfg.model_name.clone(),
            credentials_env_var: cfg.credentials_env_var.clone(),
        })
    }

    /// Embed already-normalized labels; every vector comes back unit-norm.
    pub async fn embed(&self, labels: &[String]) -> Result<Vec<LabelEmbedding>> {
        let mut req = self
            .client
            .post(format!("{}/embeddings", self.endpoint))
            .json(&serde_json::json!({ "model": self.model, "input": labels }));
        if let Some(var) = &self.credentials_env_var {
            let key = std::env::var(var)
                .map_err(|_| Error::ProviderUnavailable(format!("{var} is not set")))?;
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .await
            .map_err(|e| Error::ProviderUnavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(Error::ProviderUnavailable(format!(
                "embedding service answered {}",
                resp.status()
            )));
        }
        let body: EmbeddingResponse = resp
            .json()
            .await
            .map_err(|e| Error::ProviderUnavailable(e.to_string()))?;
        if body.data.len() != labels.len() {
            return Err(Error::ProviderUnavailable(format!(
                "asked for {} embeddings, got {}",
                labels.len(),
                body.data.len()
            )));
        }
        let mut data = body.data;
        if data.iter().all(|d| d.index.is_some()) {
            data.sort_by_key(|d| d.index);
        }
        let dim = data.first().map(|d| d.embedding.len()).unwrap_or(0);
        labels
            .iter()
            .zip(data)
            .map(|(label, d)| {
                let mut vector = d.embedding;
                if vector.len() != dim || dim == 0 {
                    return Err(Error::ProviderUnavailable("ragged embedding response".into()));
                }
                if l2_normalize(&mut vector) == 0.0 {
                    return Err(Error::ProviderUnavailable("zero embedding vector".into()));
                }
                Ok(LabelEmbedding {
                    label: label.clone(),
                    norm: vector.iter().map(|x| x * x).sum::<f64>().sqrt(),
                    vector,
                    provider: EmbeddingProviderKind::ExternalModel,
                })
            })
            .collect()
    }
}
