//! Serve the API on a loopback port and drive a two-person session from
//! Setup to Complete over HTTP, printing stage events from the SSE stream.
//!
//!     cargo run --example http_session

use std::sync::Arc;

use axis_elicit::clock::SystemClock;
use axis_elicit::fixtures;
use axis_elicit::llm::{Gateway, LlmProviderConfig, MockEcho, RetryPolicy};
use axis_elicit::session::Platform;
use axis_elicit::store::Store;
use serde_json::{json, Value};

const TOKEN: &str = "demo-token";

struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    async fn post(&self, path: &str, body: Value) -> Value {
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .bearer_auth(TOKEN)
            .json(&body)
            .send()
            .await
            .expect("request");
        let status = resp.status();
        let v: Value = resp.json().await.expect("json body");
        assert!(status.is_success(), "POST {path}: {status} {v}");
        v
    }

    async fn get(&self, path: &str) -> Value {
        let resp = self
            .http
            .get(format!("{}{path}", self.base))
            .bearer_auth(TOKEN)
            .send()
            .await
            .expect("request");
        resp.json().await.expect("json body")
    }
}

#[tokio::main]
async fn main() -> axis_elicit::Result<()> {
    let dir = tempfile::tempdir()?;
    let store = Arc::new(Store::open(dir.path(), Arc::new(SystemClock))?);
    let mut gateway = Gateway::new(store.clone(), RetryPolicy::default());
    gateway.register("default", LlmProviderConfig::mock_echo(), Arc::new(MockEcho::new()));
    let platform = Arc::new(Platform::new(store, gateway, Default::default(), Default::default()));

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    let app = axis_elicit::http::router(platform, TOKEN);
    tokio::spawn(async move { axum::serve(listener, app).await });
    let c = Client {
        base: base.clone(),
        http: reqwest::Client::new(),
    };

    let ctx = c
        .post(
            "/contexts",
            json!({
                "name": "History assistant",
                "description": "HTTP demo",
                "system_prompt": fixtures::SYSTEM_PROMPT,
                "familiarization_docs": [],
                "orientation_video_uri": null,
                "llm_config": "default",
                "embedding_config": "default",
            }),
        )
        .await;
    let sid = c.post("/sessions", json!({ "context_id": ctx["id"] })).await["id"]
        .as_str()
        .unwrap()
        .to_owned();
    let s = format!("/sessions/{sid}");

    // Print stage and segment events as they arrive.
    let mut events = c.http.get(format!("{base}{s}/events")).send().await.expect("sse");
    tokio::spawn(async move {
        while let Ok(Some(chunk)) = events.chunk().await {
            for line in String::from_utf8_lossy(&chunk).lines() {
                if let Some(data) = line.strip_prefix("data:") {
                    println!("  event {}", data.trim());
                }
            }
        }
    });

    let f = c
        .post(&format!("{s}/participants"), json!({ "pseudonym": "facilitator", "role": "facilitator" }))
        .await["id"]
        .clone();
    let mut people = Vec::new();
    for name in ["asha", "ben"] {
        people.push(c.post(&format!("{s}/participants"), json!({ "pseudonym": name })).await["id"].clone());
    }
    let baseline = c
        .post(&format!("{s}/baseline"), json!({ "transcripts": [fixtures::BASELINE_THANKSGIVING] }))
        .await["interaction_ids"][0]
        .clone();

    let advance_path = format!("{s}/advance");
    let advance = |target: &'static str| c.post(&advance_path, json!({ "actor": f, "target": target }));
    let flag_all = |flag: &'static str| {
        let people = people.clone();
        let c = &c;
        let s = s.clone();
        async move {
            for p in people {
                c.post(&format!("{s}/participants/{}/flags", p.as_str().unwrap()), json!({ "flag": flag }))
                    .await;
            }
        }
    };

    advance("Familiarize").await;
    flag_all("familiarize_ack").await;
    advance("Interact").await;
    for p in &people {
        c.post(&format!("{s}/chat"), json!({ "participant_id": p, "user_text": "Who was Akbar?" }))
            .await;
    }
    advance("ReflectInitial").await;
    for (p, label) in people.iter().zip(["bias", "too brief"]) {
        c.post(
            &format!("{s}/annotations"),
            json!({ "participant_id": p, "interaction_id": baseline, "turn_index": 1, "label_raw": label }),
        )
        .await;
    }
    flag_all("reflect_initial_done").await;
    advance("ReflectFocused").await;
    println!("board: {}", c.get(&format!("{s}/affinity")).await["points"]);
    flag_all("reflect_focused_done").await;
    advance("Discuss").await;

    let axis = &fixtures::mit_axes()[1];
    let attr = c
        .post(
            &format!("{s}/attributes"),
            json!({ "name": axis.name, "definition": axis.definition, "status": "group_final" }),
        )
        .await["id"]
        .clone();
    for segment in [1, 5] {
        if segment == 5 {
            for _ in 0..4 {
                c.post(&format!("{s}/segment/advance"), json!({ "actor": f })).await;
            }
        }
        for p in &people {
            c.post(
                &format!("{s}/rankings"),
                json!({ "participant_id": p, "segment": segment, "ordered_attribute_ids": [attr] }),
            )
            .await;
        }
    }
    advance("Complete").await;

    let report = c.get(&format!("{s}/report")).await;
    println!("\nreport:\n{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
