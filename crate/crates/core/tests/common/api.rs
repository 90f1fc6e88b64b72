//! A thin JSON client over a router served on a loopback port.

use std::sync::Arc;

use axis_elicit::fixtures;
use axis_elicit::session::Platform;
use reqwest::StatusCode;
use serde_json::{json, Value};

pub const TOKEN: &str = "test-token";

pub struct Api {
    pub base: String,
    pub client: reqwest::Client,
}

pub async fn serve(platform: Arc<Platform>) -> Api {
    let app = axis_elicit::http::router(platform, TOKEN);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    Api {
        base: format!("http://{addr}"),
        client: reqwest::Client::new(),
    }
}

impl Api {
    async fn send(&self, req: reqwest::RequestBuilder, fac: bool) -> (StatusCode, Value) {
        let req = if fac { req.bearer_auth(TOKEN) } else { req };
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let text = resp.text().await.unwrap();
        let v = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, v)
    }

    pub async fn post(&self, path: &str, body: Value, fac: bool) -> (StatusCode, Value) {
        self.send(self.client.post(format!("{}{path}", self.base)).json(&body), fac)
            .await
    }

    pub async fn get(&self, path: &str, fac: bool) -> (StatusCode, Value) {
        self.send(self.client.get(format!("{}{path}", self.base)), fac).await
    }

    pub async fn delete(&self, path: &str) -> (StatusCode, Value) {
        self.send(self.client.delete(format!("{}{path}", self.base)), false)
            .await
    }

    /// POST and insist on a 2xx.
    pub async fn ok(&self, path: &str, body: Value, fac: bool) -> Value {
        let (status, v) = self.post(path, body, fac).await;
        assert!(status.is_success(), "POST {path}: {status} {v}");
        v
    }

    pub async fn ok_get(&self, path: &str, fac: bool) -> Value {
        let (status, v) = self.get(path, fac).await;
        assert!(status.is_success(), "GET {path}: {status} {v}");
        v
    }
}

pub struct HttpSession {
    pub session: String,
    pub facilitator: String,
    pub participants: Vec<String>,
    pub attributes: Vec<String>,
}

fn s(v: &Value) -> String {
    v.as_str().unwrap().to_owned()
}

/// Run a whole session over HTTP from Setup to Complete using the
/// `llm` provider. Every participant chats twice in one interaction with
/// the given user turns.
pub async fn drive_session(api: &Api, llm: &str, n: usize, prompts: &[[&str; 2]]) -> HttpSession {
    let ctx = api
        .ok(
            "/contexts",
            json!({
                "name": "History assistant",
                "description": "Education deployment",
                "system_prompt": fixtures::SYSTEM_PROMPT,
                "familiarization_docs": [],
                "orientation_video_uri": null,
                "llm_config": llm,
                "embedding_config": "default",
            }),
            true,
        )
        .await;
    let session = s(&api.ok("/sessions", json!({ "context_id": ctx["id"] }), true).await["id"]);
    let base = format!("/sessions/{session}");
    let facilitator = s(&api
        .ok(&format!("{base}/participants"), json!({ "pseudonym": "facilitator", "role": "facilitator" }), true)
        .await["id"]);
    let mut participants = Vec::new();
    for i in 0..n {
        let p = api
            .ok(&format!("{base}/participants"), json!({ "pseudonym": format!("p{i}") }), true)
            .await;
        participants.push(s(&p["id"]));
    }
    let baseline = api
        .ok(&format!("{base}/baseline"), json!({ "transcripts": [fixtures::BASELINE_THANKSGIVING] }), true)
        .await;
    let baseline_id = s(&baseline["interaction_ids"][0]);

    let advance = |target: &'static str| {
        let body = json!({ "actor": facilitator, "target": target });
        let path = format!("{base}/advance");
        async move { api.ok(&path, body, true).await }
    };
    let flag = |flag: &'static str| {
        let calls: Vec<(String, Value)> = participants
            .iter()
            .map(|p| (format!("{base}/participants/{p}/flags"), json!({ "flag": flag })))
            .collect();
        async move {
            for (path, body) in calls {
                api.ok(&path, body, false).await;
            }
        }
    };

    advance("Familiarize").await;
    flag("familiarize_ack").await;
    advance("Interact").await;
    let mut own = Vec::new();
    for (i, p) in participants.iter().enumerate() {
        let [first, second] = prompts[i % prompts.len()];
        let r = api
            .ok(&format!("{base}/chat"), json!({ "participant_id": p, "user_text": first, "topic_tags": ["history"] }), false)
            .await;
        let iid = s(&r["interaction_id"]);
        api.ok(
            &format!("{base}/chat"),
            json!({ "participant_id": p, "interaction_id": iid, "user_text": second }),
            false,
        )
        .await;
        own.push(iid);
    }
    advance("ReflectInitial").await;
    let labels = ["bias", "biased", "too long", "empathy", "factual", "sources"];
    for (i, p) in participants.iter().enumerate() {
        let w = api.ok_get(&format!("{base}/workload/{p}"), false).await;
        assert_eq!(w["interaction_ids"].as_array().unwrap().len(), 2);
        for (j, target) in [&baseline_id, &own[i]].into_iter().enumerate() {
            api.ok(
                &format!("{base}/annotations"),
                json!({
                    "participant_id": p,
                    "interaction_id": target,
                    "turn_index": 1,
                    "label_raw": labels[(i + j) % labels.len()],
                }),
                false,
            )
            .await;
        }
    }
    flag("reflect_initial_done").await;
    advance("ReflectFocused").await;
    for p in &participants {
        let packet = api.ok_get(&format!("{base}/packet/{p}"), false).await;
        let mine: Vec<Value> = packet["annotations"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| a["id"].clone())
            .collect();
        api.ok(
            &format!("{base}/groups"),
            json!({ "participant_id": p, "group_label": "accuracy", "annotation_ids": mine }),
            false,
        )
        .await;
    }
    api.ok_get(&format!("{base}/affinity"), false).await;
    flag("reflect_focused_done").await;
    advance("Discuss").await;
    let mut attributes = Vec::new();
    for axis in fixtures::mit_axes().iter().take(3) {
        let a = api
            .ok(
                &format!("{base}/attributes"),
                json!({
                    "name": axis.name,
                    "definition": axis.definition,
                    "proposer_ids": [participants[0]],
                    "example_refs": [{ "interaction_id": baseline_id, "turn_index": 1 }],
                    "status": "group_final",
                }),
                false,
            )
            .await;
        attributes.push(s(&a["id"]));
    }
    for (round, segment) in [(0usize, 1u8), (1, 5)] {
        if segment == 5 {
            for _ in 0..4 {
                api.ok(&format!("{base}/segment/advance"), json!({ "actor": facilitator }), true)
                    .await;
            }
        }
        for (i, p) in participants.iter().enumerate() {
            let mut order = attributes.clone();
            let len = order.len();
            order.rotate_left((i + round) % len);
            api.ok(
                &format!("{base}/rankings"),
                json!({ "participant_id": p, "segment": segment, "ordered_attribute_ids": order }),
                false,
            )
            .await;
        }
    }
    for (i, p) in participants.iter().enumerate() {
        for a in &attributes {
            api.ok(
                &format!("{base}/likert"),
                json!({ "participant_id": p, "attribute_id": a, "score": 3 + i % 3 }),
                false,
            )
            .await;
        }
    }
    advance("Complete").await;
    HttpSession {
        session,
        facilitator,
        participants,
        attributes,
    }
}
