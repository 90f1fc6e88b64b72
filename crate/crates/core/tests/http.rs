mod common;

use std::time::Duration;

use axis_elicit::http::ErrorBody;
use axis_elicit::model::Stage;
use common::api::{drive_session, serve};
use common::*;
use reqwest::StatusCode;
use serde_json::{json, Value};

const PROMPTS: [[&str; 2]; 1] = [["Who built the Red Fort?", "Why was it important later?"]];

fn error(v: &Value) -> ErrorBody {
    serde_json::from_value(v.clone()).expect("error body shape")
}

#[tokio::test]
async fn facilitator_routes_need_the_token() {
    let h = harness();
    let api = serve(h.platform.clone()).await;
    let spec = serde_json::to_value(new_context("default")).unwrap();
    let (status, v) = api.post("/contexts", spec.clone(), false).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_eq!(error(&v).code, "Unauthorized");
    let resp = api
        .client
        .post(format!("{}/contexts", api.base))
        .bearer_auth("wrong")
        .json(&spec)
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::UNAUTHORIZED);
    let (status, ctx) = api.post("/contexts", spec, true).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(ctx["system_prompt"], axis_elicit::fixtures::SYSTEM_PROMPT);

    let r = roster(&h, 1);
    let (status, _) = api.get(&format!("/sessions/{}/export", r.session), false).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let (status, _) = api.get(&format!("/sessions/{}/words", r.session), false).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let (status, _) = api.get(&format!("/sessions/{}/report?forced=true", r.session), false).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn errors_map_to_status_and_body() {
    let h = harness();
    let api = serve(h.platform.clone()).await;
    let r = roster(&h, 2);
    let base = format!("/sessions/{}", r.session);

    let (status, v) = api.get("/sessions/ses-missing", false).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let e = error(&v);
    assert_eq!(e.code, "NotFound");
    assert!(!e.message.is_empty());

    let resp = api
        .client
        .post(format!("{}{base}/advance", api.base))
        .bearer_auth(common::api::TOKEN)
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let e: ErrorBody = resp.json().await.unwrap();
    assert_eq!(e.code, "ValidationError");

    let (status, v) = api
        .post(&format!("{base}/advance"), json!({ "actor": r.participants[0], "target": "Familiarize" }), true)
        .await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert_eq!(error(&v).code, "NotFacilitator");

    let (status, v) = api
        .post(&format!("{base}/advance"), json!({ "actor": r.facilitator, "target": "Discuss", "forced": true }), true)
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(error(&v).detail, json!({ "from": "Setup", "to": "Discuss" }));

    api.ok(&format!("{base}/advance"), json!({ "actor": r.facilitator, "target": "Familiarize" }), true)
        .await;
    let (status, v) = api
        .post(&format!("{base}/advance"), json!({ "actor": r.facilitator, "target": "Interact" }), true)
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    let e = error(&v);
    assert_eq!(e.code, "PreconditionFailed");
    assert_eq!(e.detail["unmet"].as_array().unwrap().len(), 2);

    let (status, v) = api.get(&format!("{base}/affinity"), false).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(error(&v).code, "NoAnnotations");
    let (status, v) = api.get(&format!("{base}/export?format=xml"), true).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error(&v).code, "UnsupportedFormat");
    let (status, _) = api.get(&format!("{base}/borda?k=x"), false).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let view = api.ok_get(&base, false).await;
    assert_eq!(view["session"]["stage"], "Familiarize");
    assert_eq!(view["participants"].as_array().unwrap().len(), 3);
    assert!(view["segment_minutes"].is_object());
}

/// Read SSE frames until one with `event: {name}` arrives.
async fn next_event(resp: &mut reqwest::Response, buf: &mut String, name: &str) -> Value {
    loop {
        if let Some(end) = buf.find("\n\n") {
            let frame: String = buf.drain(..end + 2).collect();
            let mut event = None;
            let mut data = String::new();
            for line in frame.lines() {
                if let Some(e) = line.strip_prefix("event:") {
                    event = Some(e.trim().to_owned());
                } else if let Some(d) = line.strip_prefix("data:") {
                    data.push_str(d.trim_start());
                }
            }
            if event.as_deref() == Some(name) {
                return serde_json::from_str(&data).unwrap();
            }
            continue;
        }
        let chunk = tokio::time::timeout(Duration::from_secs(5), resp.chunk())
            .await
            .expect("event within 5 s")
            .unwrap()
            .expect("stream open");
        buf.push_str(std::str::from_utf8(&chunk).unwrap());
    }
}

#[tokio::test]
async fn event_stream_reports_stage_and_segment_changes() {
    let h = harness();
    let api = serve(h.platform.clone()).await;
    let r = roster(&h, 1);
    let mut resp = api
        .client
        .get(format!("{}/sessions/{}/events", api.base, r.session))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert!(resp.headers()["content-type"]
        .to_str()
        .unwrap()
        .starts_with("text/event-stream"));
    let mut buf = String::new();
    let sync = next_event(&mut resp, &mut buf, "sync").await;
    assert_eq!(sync, json!({ "seq": 0, "kind": "sync", "stage": "Setup", "segment": null, "forced": false }));

    r.advance(&h, Stage::Familiarize);
    let e = next_event(&mut resp, &mut buf, "stage").await;
    assert_eq!((e["seq"].as_u64(), e["stage"].as_str()), (Some(1), Some("Familiarize")));

    for to in [Stage::Interact, Stage::ReflectInitial, Stage::ReflectFocused, Stage::Discuss] {
        h.platform.advance_stage(&r.session, &r.facilitator, to, true).unwrap();
    }
    h.platform.advance_segment(&r.session, &r.facilitator, true).unwrap();
    let mut seqs = vec![1];
    loop {
        let e = next_event(&mut resp, &mut buf, "stage").await;
        seqs.push(e["seq"].as_u64().unwrap());
        if e["stage"] == "Discuss" {
            assert_eq!(e["segment"], 1);
            assert_eq!(e["forced"], true);
            break;
        }
    }
    let seg = next_event(&mut resp, &mut buf, "segment").await;
    assert_eq!((seg["seq"].as_u64(), seg["segment"].as_u64()), (Some(6), Some(2)));
    assert_eq!(seqs, [1, 2, 3, 4, 5]);

    let (status, _) = api.get("/sessions/ses-none/events", false).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn whole_session_over_http_and_import() {
    let h = harness();
    let api = serve(h.platform.clone()).await;
    let run = drive_session(&api, "default", 3, &PROMPTS).await;
    let base = format!("/sessions/{}", run.session);

    let report = api.ok_get(&format!("{base}/report"), false).await;
    assert_eq!(report["final_axes"].as_array().unwrap().len(), 3);
    assert!(report["final_axes"][0]["examples"][0]["excerpt"]
        .as_str()
        .unwrap()
        .starts_with("Thanksgiving"));
    let shift = api.ok_get(&format!("{base}/shift"), false).await;
    assert_eq!(shift["n_defined"], 3);
    let borda = api.ok_get(&format!("{base}/borda?segment=1&k=3"), false).await;
    assert_eq!(borda["k"], 3);
    let words = api.ok_get(&format!("{base}/words?stage=initial"), true).await;
    assert!(words.as_array().unwrap().iter().any(|w| w["token"] == "bias"));

    let n = api.ok_get(&format!("{base}/affinity/neighbors?label=bias"), false).await;
    assert_eq!(n[0]["label"], "biased");
    let (status, v) = api.get(&format!("{base}/affinity/neighbors?label=bias&k=-1"), false).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error(&v).code, "ValidationError");
    let layout = api.ok_get(&format!("{base}/affinity"), false).await;
    assert_eq!(layout["provider"], "trigram_fallback");

    let json = api
        .client
        .get(format!("{}{base}/export?format=json", api.base))
        .bearer_auth(common::api::TOKEN)
        .send()
        .await
        .unwrap();
    assert_eq!(json.headers()["content-type"], "application/json");
    let json = json.text().await.unwrap();
    let md = api.ok_get(&format!("{base}/export?format=markdown"), true).await;
    assert!(md.as_str().unwrap().contains("| Cultural Context |"));
    let csv = api.ok_get(&format!("{base}/export?format=csv_bundle"), true).await;
    assert_eq!(csv["files"].as_object().unwrap().len(), 3);

    let other = harness();
    let api2 = serve(other.platform.clone()).await;
    let resp = api2
        .client
        .post(format!("{}/sessions/import", api2.base))
        .bearer_auth(common::api::TOKEN)
        .body(json.clone())
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::CREATED);
    let again = api2
        .client
        .get(format!("{}{base}/export", api2.base))
        .bearer_auth(common::api::TOKEN)
        .send()
        .await
        .unwrap()
        .text()
        .await
        .unwrap();
    assert_eq!(json, again);
    let (status, v) = api2.post("/sessions/import", json!({ "nope": 1 }), true).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error(&v).code, "ValidationError");
}

#[tokio::test]
async fn retract_over_http() {
    let h = harness();
    let api = serve(h.platform.clone()).await;
    let r = roster(&h, 1);
    through_interact(&h, &r).await;
    r.advance(&h, Stage::ReflectInitial);
    let base = format!("/sessions/{}", r.session);
    let (status, a) = api
        .post(
            &format!("{base}/annotations"),
            json!({ "participant_id": r.participants[0], "interaction_id": r.baseline[0], "turn_index": 1, "label_raw": "dry" }),
            false,
        )
        .await;
    assert_eq!(status, StatusCode::CREATED);
    let aid = a["id"].as_str().unwrap();
    let (status, v) = api.delete(&format!("{base}/annotations/{aid}?participant_id=par-x")).await;
    assert!(status.is_client_error(), "{status} {v}");
    let (status, v) = api
        .delete(&format!("{base}/annotations/{aid}?participant_id={}", r.participants[0]))
        .await;
    assert!(status.is_success(), "{status} {v}");
    let (status, v) = api.get(&format!("{base}/affinity"), false).await;
    assert_eq!((status, error(&v).code.as_str()), (StatusCode::UNPROCESSABLE_ENTITY, "NoAnnotations"));
}

