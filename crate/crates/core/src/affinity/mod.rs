//! The affinity board: every distinct label embedded, projected to 2D by
//! exact PCA, and scaled into `[-1, 1]^2`.

pub mod embed;
pub mod pca;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::coding::normalized_label_text;
use crate::error::{Error, Result};
use crate::ids::AnnotationId;

pub use embed::{
    cosine, embed_label, EmbeddingProviderConfig, EmbeddingProviderKind, ExternalEmbedder,
    LabelEmbedding, TRIGRAM_DIM,
};

fn six_places<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let r = (x * 1e6).round() / 1e6;
    s.serialize_f64(if r == 0.0 { 0.0 } else { r })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPoint {
    pub label: String,
    #[serde(serialize_with = "six_places")]
    pub x: f64,
    #[serde(serialize_with = "six_places")]
    pub y: f64,
    pub annotation_ids: Vec<AnnotationId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityLayout {
    pub provider: EmbeddingProviderKind,
    pub dimension: usize,
    pub points: Vec<LayoutPoint>,
    pub explained_variance: [f64; 2],
}

/// A label as it comes off an annotation, with the annotation it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelInput {
    pub label_raw: String,
    pub annotation_id: AnnotationId,
}

/// Distinct normalized labels (ascending) with their annotations.
/// Labels that normalize to nothing are dropped.
pub fn distinct_labels(inputs: &[LabelInput]) -> Vec<(String, Vec<AnnotationId>)> {
    let mut by_label: BTreeMap<String, Vec<AnnotationId>> = BTreeMap::new();
    for input in inputs {
        let label = normalized_label_text(&input.label_raw);
        if label.is_empty() {
            continue;
        }
        by_label
            .entry(label)
            .or_default()
            .push(input.annotation_id.clone());
    }
    by_label
        .into_iter()
        .map(|(label, mut ids)| {
            ids.sort();
            ids.dedup();
            (label, ids)
        })
        .collect()
}

/// Trigram-embed every distinct label.
pub fn embed_trigram(labels: &[(String, Vec<AnnotationId>)]) -> Result<Vec<LabelEmbedding>> {
    labels.iter().map(|(l, _)| embed_label(l)).collect()
}

/// Lay out labels whose embeddings are already computed. `embeddings[i]`
/// belongs to `labels[i]`.
pub fn layout_from_embeddings(
    labels: &[(String, Vec<AnnotationId>)],
    embeddings: &[LabelEmbedding],
) -> Result<AffinityLayout> {
    if labels.is_empty() {
        return Err(Error::EmptyLabel);
    }
    assert_eq!(labels.len(), embeddings.len(), "one embedding per label");
    let rows: Vec<Vec<f64>> = embeddings.iter().map(|e| e.vector.clone()).collect();
    let projection = pca::project_2d(&rows);
    let coords = pca::fit_unit_square(&projection.scores);
    let points = labels
        .iter()
        .zip(coords)
        .map(|((label, ids), [x, y])| LayoutPoint {
            label: label.clone(),
            x,
            y,
            annotation_ids: ids.clone(),
        })
        .collect();
    Ok(AffinityLayout {
        provider: embeddings[0].provider,
        dimension: embeddings[0].vector.len(),
        points,
        explained_variance: projection.explained_variance,
    })
}

/// Offline layout using the trigram embedder.
pub fn build_layout(inputs: &[LabelInput]) -> Result<AffinityLayout> {
    let labels = distinct_labels(inputs);
    let embeddings = embed_trigram(&labels)?;
    layout_from_embeddings(&labels, &embeddings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub label: String,
    pub cosine: f64,
}

/// The `k` labels most similar to `label`, by cosine similarity descending,
/// ties broken by ascending label.
pub fn nearest_neighbors(
    embeddings: &[LabelEmbedding],
    label: &str,
    k: usize,
) -> Result<Vec<Neighbor>> {
    let key = normalized_label_text(label);
    let target = embeddings
        .iter()
        .find(|e| e.label == key)
        .ok_or_else(|| Error::UnknownLabel(label.to_owned()))?;
    let mut others: Vec<&LabelEmbedding> = embeddings.iter().filter(|e| e.label != key).collect();
    others.sort_by(|a, b| a.label.cmp(&b.label));
    others.dedup_by(|a, b| a.label == b.label);
    if k == 0 || k > others.len() {
        return Err(Error::BadK {
            k,
            available: others.len() + 1,
        });
    }
    let mut scored: Vec<Neighbor> = others
        .into_iter()
        .map(|e| Neighbor {
            label: e.label.clone(),
            cosine: cosine(&target.vector, &e.vector),
        })
        .collect();
    scored.sort_by(|a, b| b.cosine.total_cmp(&a.cosine).then_with(|| a.label.cmp(&b.label)));
    scored.truncate(k);
    Ok(scored)
}
