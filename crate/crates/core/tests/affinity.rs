mod common;

use std::collections::HashMap;
use std::sync::Arc;

use axis_elicit::affinity::pca::project_2d;
use axis_elicit::affinity::{
    build_layout, cosine, embed_label, layout_from_embeddings, nearest_neighbors,
    EmbeddingProviderConfig, EmbeddingProviderKind, ExternalEmbedder, LabelEmbedding, LabelInput,
};
use axis_elicit::clock::ManualClock;
use axis_elicit::fixtures;
use axis_elicit::llm::{Gateway, LlmProviderConfig, MockEcho, RetryPolicy};
use axis_elicit::model::Stage;
use axis_elicit::session::Platform;
use axis_elicit::store::Store;
use common::oracles::{check_pca, trigram_oracle};
use common::*;
use proptest::prelude::*;

fn inputs(labels: &[&str]) -> Vec<LabelInput> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| LabelInput {
            label_raw: (*l).into(),
            annotation_id: format!("ann-x-{i:06x}").into(),
        })
        .collect()
}

#[test]
fn trigram_embedding_matches_reference() {
    for label in ["bias", "biased", "empathy", "bias to British government", "ü"] {
        let e = embed_label(label).unwrap();
        assert_eq!(e.vector, trigram_oracle(&e.label), "{label}");
        assert_eq!(e.vector.len(), 256);
        assert!((e.norm - 1.0).abs() < 1e-9);
        assert_eq!(e.provider, EmbeddingProviderKind::TrigramFallback);
    }
    assert_eq!(embed_label("bias").unwrap(), embed_label("bias").unwrap());
    assert_eq!(embed_label("  ,, ").unwrap_err().code(), "EmptyLabel");
}

#[test]
fn shared_trigrams_mean_higher_cosine() {
    let bias = embed_label("bias").unwrap();
    let biased = embed_label("biased").unwrap();
    let empathy = embed_label("empathy").unwrap();
    let near = cosine(&bias.vector, &biased.vector);
    let far = cosine(&bias.vector, &empathy.vector);
    assert!(near > far, "{near} vs {far}");
    // {#bi, bia, ias} shared out of 4 and 6 trigrams, absent collisions.
    assert!((near - 3.0 / (2.0 * 6f64.sqrt())).abs() < 0.2);
}

#[test]
fn degenerate_layouts_are_exact() {
    let one = build_layout(&inputs(&["bias"; 5])).unwrap();
    assert_eq!(one.points.len(), 1);
    assert_eq!((one.points[0].x, one.points[0].y), (0.0, 0.0));
    assert_eq!(one.explained_variance, [0.0, 0.0]);

    let two = build_layout(&inputs(&["bias", "empathy", "Bias"])).unwrap();
    assert_eq!(two.points.len(), 2);
    assert_eq!(two.points[0].y, 0.0);
    assert_eq!(two.points[1].y, 0.0);
    assert_eq!(two.points[0].x, -two.points[1].x);
    assert_eq!(two.points[0].x.abs(), 1.0);
    assert_eq!(two.points[0].annotation_ids.len(), 2);
}

#[test]
fn published_labels_place_bias_near_biased() {
    let layout = build_layout(&inputs(&fixtures::mit_initial_labels())).unwrap();
    assert_eq!(layout.points.len(), 10);
    let at = |l: &str| layout.points.iter().find(|p| p.label == l).unwrap();
    let dist = |a: &str, b: &str| {
        let (p, q) = (at(a), at(b));
        ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()
    };
    let farthest = layout
        .points
        .iter()
        .map(|p| dist("bias", &p.label))
        .fold(0.0, f64::max);
    assert!(dist("bias", "biased") < farthest);

    let rows: Vec<Vec<f64>> = layout
        .points
        .iter()
        .map(|p| embed_label(&p.label).unwrap().vector)
        .collect();
    check_pca(&rows, 1e-6).unwrap();
}

#[test]
fn layout_json_shape() {
    let layout = build_layout(&inputs(&["bias", "biased", "empathy"])).unwrap();
    let v = serde_json::to_value(&layout).unwrap();
    assert_eq!(v["provider"], "trigram_fallback");
    assert_eq!(v["dimension"], 256);
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
    for p in v["points"].as_array().unwrap() {
        for axis in ["x", "y"] {
            let x = p[axis].as_f64().unwrap();
            assert_eq!(x, (x * 1e6).round() / 1e6);
        }
        assert!(p["annotation_ids"].is_array());
    }
    let ev = v["explained_variance"].as_array().unwrap();
    assert_eq!(ev.len(), 2);
}

#[test]
fn neighbor_queries() {
    let labels = ["bias", "biased", "empathy"];
    let embs: Vec<LabelEmbedding> = labels.iter().map(|l| embed_label(l).unwrap()).collect();
    let n = nearest_neighbors(&embs, "bias", 1).unwrap();
    assert_eq!(n[0].label, "biased");
    let all = nearest_neighbors(&embs, "Bias", 2).unwrap();
    let mut names: Vec<&str> = all.iter().map(|n| n.label.as_str()).collect();
    assert!(all[0].cosine >= all[1].cosine);
    names.sort();
    assert_eq!(names, ["biased", "empathy"]);
    assert_eq!(nearest_neighbors(&embs, "bias", 3).unwrap_err().code(), "BadK");
    assert_eq!(nearest_neighbors(&embs, "bias", 0).unwrap_err().code(), "BadK");
    assert_eq!(nearest_neighbors(&embs, "nope", 1).unwrap_err().code(), "UnknownLabel");

    // Identical vectors tie; the lexicographically smaller label wins.
    let v = |label: &str, vector: Vec<f64>| LabelEmbedding {
        label: label.into(),
        vector,
        provider: EmbeddingProviderKind::ExternalModel,
        norm: 1.0,
    };
    let tied = vec![
        v("q", vec![1.0, 0.0]),
        v("zeta", vec![0.6, 0.8]),
        v("alpha", vec![0.6, 0.8]),
    ];
    let n = nearest_neighbors(&tied, "q", 2).unwrap();
    assert_eq!(n[0].label, "alpha");
    assert_eq!(n[1].label, "zeta");
}

#[test]
fn pca_handles_identical_and_collinear_rows() {
    let same = vec![vec![0.6, 0.8, 0.0]; 4];
    let p = project_2d(&same);
    assert!(p.scores.iter().all(|s| *s == [0.0, 0.0]));
    let line = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![4.0, 4.0]];
    check_pca(&line, 1e-9).unwrap();
    let p = project_2d(&line);
    assert!(p.scores.iter().all(|s| s[1] == 0.0));
    assert_eq!(p.explained_variance[1], 0.0);
}

fn label_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-z]{2,9}( [a-z]{2,7})?", 1..=8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pca_matches_eigendecomposition_oracle(labels in label_strategy()) {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let layout = build_layout(&inputs(&refs)).unwrap();
        let rows: Vec<Vec<f64>> = layout.points.iter().map(|p| embed_label(&p.label).unwrap().vector).collect();
        if let Err(e) = check_pca(&rows, 1e-6) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn layout_is_permutation_invariant(labels in label_strategy(), seed in any::<u64>()) {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let mut shuffled = inputs(&refs);
        // Deterministic Fisher-Yates driven by the generated seed.
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = build_layout(&inputs(&refs)).unwrap();
        let b = build_layout(&shuffled).unwrap();
        prop_assert_eq!(&a, &b);
        let distinct: std::collections::BTreeSet<String> = refs.iter().map(|l| axis_elicit::coding::normalized_label_text(l)).collect();
        prop_assert_eq!(a.points.len(), distinct.len());
        for p in &a.points {
            prop_assert!(p.x.abs() <= 1.0 && p.y.abs() <= 1.0);
        }
    }

    #[test]
    fn cosine_ranking_is_reproducible(a in "[a-z]{1,8}", b in "[a-z]{1,8}", c in "[a-z]{1,8}") {
        let e = |l: &str| embed_label(l).unwrap().vector;
        let stored = [cosine(&e(&a), &e(&b)), cosine(&e(&a), &e(&c)), cosine(&e(&b), &e(&c))];
        let fresh = [
            cosine(&trigram_oracle(&a), &trigram_oracle(&b)),
            cosine(&trigram_oracle(&a), &trigram_oracle(&c)),
            cosine(&trigram_oracle(&b), &trigram_oracle(&c)),
        ];
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(stored[i] < stored[j], fresh[i] < fresh[j]);
            }
        }
    }
}

fn platform_with_embedding(dir: &std::path::Path, cfg: EmbeddingProviderConfig) -> Platform {
    let store = Arc::new(Store::open(dir, Arc::new(ManualClock::fixed())).unwrap());
    let mut gateway = Gateway::new(store.clone(), RetryPolicy::immediate(1));
    gateway.register("default", LlmProviderConfig::mock_echo(), Arc::new(MockEcho::new()));
    let mut embedding = HashMap::new();
    embedding.insert("default".to_owned(), cfg);
    Platform::new(store, gateway, embedding, Default::default())
}

async fn board_session(h_platform: &Platform) -> (axis_elicit::ids::SessionId, Vec<axis_elicit::ids::ParticipantId>) {
    use axis_elicit::coding::AnnotateRequest;
    use axis_elicit::model::{ProgressFlag, Role};
    let ctx = h_platform.create_context(new_context("default")).unwrap();
    let s = h_platform.create_session(&ctx.id).unwrap().id;
    let f = h_platform.add_participant(&s, "f", Role::Facilitator).unwrap().id;
    let p = h_platform.add_participant(&s, "p", Role::Participant).unwrap().id;
    let base = h_platform
        .load_baseline(&s, &[fixtures::BASELINE_THANKSGIVING.into()], None)
        .unwrap();
    h_platform.advance_stage(&s, &f, Stage::Familiarize, false).unwrap();
    h_platform.mark_progress(&s, &p, ProgressFlag::FamiliarizeAck).unwrap();
    h_platform.advance_stage(&s, &f, Stage::Interact, false).unwrap();
    h_platform.advance_stage(&s, &f, Stage::ReflectInitial, true).unwrap();
    for l in ["bias", "biased", "factual"] {
        h_platform
            .annotate(
                &s,
                AnnotateRequest {
                    participant_id: p.clone(),
                    interaction_id: base[0].clone(),
                    turn_index: 1,
                    char_range: None,
                    label_raw: l.into(),
                },
            )
            .unwrap();
    }
    (s, vec![f, p])
}

#[tokio::test]
async fn session_board_is_memoized_and_invalidated() {
    let dir = tempfile::tempdir().unwrap();
    let platform = platform_with_embedding(dir.path(), EmbeddingProviderConfig::default());
    let (s, ids) = board_session(&platform).await;
    let a = platform.affinity_layout(&s).await.unwrap();
    assert_eq!(a.points.len(), 3);
    assert_eq!(a, platform.affinity_layout(&s).await.unwrap());
    let n = platform.nearest_neighbors(&s, "bias", 1).await.unwrap();
    assert_eq!(n[0].label, "biased");

    let st = platform.snapshot(&s).unwrap();
    platform
        .annotate(
            &s,
            axis_elicit::coding::AnnotateRequest {
                participant_id: ids[1].clone(),
                interaction_id: st.session.baseline_interaction_ids[0].clone(),
                turn_index: 1,
                char_range: None,
                label_raw: "dry".into(),
            },
        )
        .unwrap();
    let b = platform.affinity_layout(&s).await.unwrap();
    assert_eq!(b.points.len(), 4);
}

#[tokio::test]
async fn external_embeddings_are_used_and_fall_back_when_unreachable() {
    use axum::routing::post;
    use axum::{Json, Router};

    // Deterministic fake: the vector is (len, vowels, 1).
    async fn embeddings(Json(body): Json<serde_json::Value>) -> Json<serde_json::Value> {
        let data: Vec<serde_json::Value> = body["input"]
            .as_array()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let s = s.as_str().unwrap();
                let vowels = s.chars().filter(|c| "aeiou".contains(*c)).count();
                serde_json::json!({ "index": i, "embedding": [s.len() as f64, vowels as f64, 1.0] })
            })
            .rev()
            .collect();
        Json(serde_json::json!({ "data": data }))
    }
    let app = Router::new().route("/embeddings", post(embeddings));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let cfg = EmbeddingProviderConfig {
        kind: EmbeddingProviderKind::ExternalModel,
        endpoint: Some(format!("http://{addr}")),
        model_name: "fake".into(),
        credentials_env_var: None,
        timeout_secs: 5,
    };
    let direct = ExternalEmbedder::from_config(&cfg)
        .unwrap()
        .embed(&["ab".into(), "xyz".into()])
        .await
        .unwrap();
    assert_eq!(direct[0].label, "ab");
    assert!((direct[0].vector[0] - 2.0 / 6f64.sqrt()).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let platform = platform_with_embedding(dir.path(), cfg.clone());
    let (s, _) = board_session(&platform).await;
    let layout = platform.affinity_layout(&s).await.unwrap();
    assert_eq!(layout.provider, EmbeddingProviderKind::ExternalModel);
    assert_eq!(layout.dimension, 3);

    let dir = tempfile::tempdir().unwrap();
    let mut dead = cfg;
    dead.endpoint = Some("http://127.0.0.1:9".into());
    let platform = platform_with_embedding(dir.path(), dead);
    let (s, _) = board_session(&platform).await;
    let layout = platform.affinity_layout(&s).await.unwrap();
    assert_eq!(layout.provider, EmbeddingProviderKind::TrigramFallback);
    let labels: Vec<(String, Vec<axis_elicit::ids::AnnotationId>)> = layout
        .points
        .iter()
        .map(|p| (p.label.clone(), p.annotation_ids.clone()))
        .collect();
    let embs: Vec<LabelEmbedding> = labels.iter().map(|(l, _)| embed_label(l).unwrap()).collect();
    assert_eq!(layout, layout_from_embeddings(&labels, &embs).unwrap());
}
