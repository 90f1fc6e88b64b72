//! Export a session as JSON, CSV and Markdown, then import the JSON into a
//! second store and check the round trip.
//!
//!     cargo run --example export_import

use std::sync::Arc;

use axis_elicit::clock::SystemClock;
use axis_elicit::coding::AnnotateRequest;
use axis_elicit::consensus::RankingRequest;
use axis_elicit::fixtures;
use axis_elicit::llm::{ChatRequest, Gateway, LlmProviderConfig, MockEcho, RetryPolicy};
use axis_elicit::model::{AttributeStatus, NewContext, Role, Stage};
use axis_elicit::session::{AttributeRequest, ExportDocument, ExportFormat, Platform};
use axis_elicit::store::Store;

fn platform(dir: &std::path::Path) -> axis_elicit::Result<Platform> {
    let store = Arc::new(Store::open(dir, Arc::new(SystemClock))?);
    let mut gateway = Gateway::new(store.clone(), RetryPolicy::default());
    gateway.register("default", LlmProviderConfig::mock_echo(), Arc::new(MockEcho::new()));
    Ok(Platform::new(store, gateway, Default::default(), Default::default()))
}

#[tokio::main]
async fn main() -> axis_elicit::Result<()> {
    let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
    let source = platform(a.path())?;

    let ctx = source.create_context(NewContext {
        name: "History assistant".into(),
        description: "Export demo".into(),
        system_prompt: fixtures::SYSTEM_PROMPT.into(),
        familiarization_docs: vec![],
        orientation_video_uri: None,
        llm_config: "default".into(),
        embedding_config: "default".into(),
    })?;
    let s = source.create_session(&ctx.id)?.id;
    let f = source.add_participant(&s, "facilitator", Role::Facilitator)?.id;
    let p = source.add_participant(&s, "reviewer", Role::Participant)?.id;
    let baseline = source.load_baseline(&s, &[fixtures::BASELINE_THANKSGIVING.into()], None)?;

    // Forced transitions keep the demo short; each is logged as bypassed.
    source.advance_stage(&s, &f, Stage::Familiarize, false)?;
    source.advance_stage(&s, &f, Stage::Interact, true)?;
    source
        .send_message(
            &s,
            ChatRequest {
                participant_id: p.clone(),
                interaction_id: None,
                user_text: "When did the Mughal empire end?".into(),
                topic_tags: vec![],
            },
        )
        .await?;
    source.advance_stage(&s, &f, Stage::ReflectInitial, false)?;
    source.annotate(
        &s,
        AnnotateRequest {
            participant_id: p.clone(),
            interaction_id: baseline[0].clone(),
            turn_index: 1,
            char_range: None,
            label_raw: "Western-centric framing".into(),
        },
    )?;
    source.advance_stage(&s, &f, Stage::ReflectFocused, true)?;
    source.advance_stage(&s, &f, Stage::Discuss, true)?;
    let axis = &fixtures::mit_axes()[0];
    let attr = source.put_attribute(
        &s,
        AttributeRequest {
            id: None,
            name: axis.name.clone(),
            definition: axis.definition.clone(),
            proposer_ids: vec![p.clone()],
            example_refs: vec![],
            status: AttributeStatus::GroupFinal,
        },
    )?;
    source.advance_segment(&s, &f, true)?;
    while source.snapshot(&s)?.session.discussion_segment != Some(5) {
        source.advance_segment(&s, &f, false)?;
    }
    source.submit_ranking(
        &s,
        RankingRequest {
            participant_id: p.clone(),
            segment: 5,
            ordered_attribute_ids: vec![attr.id],
        },
    )?;
    source.advance_stage(&s, &f, Stage::Complete, false)?;

    if let ExportDocument::CsvBundle(files) = source.export(&s, ExportFormat::CsvBundle)? {
        for (name, body) in files {
            println!("--- {name}\n{body}");
        }
    }
    if let ExportDocument::Markdown(md) = source.export(&s, ExportFormat::Markdown)? {
        println!("--- report.md\n{md}");
    }
    let ExportDocument::Json(json) = source.export(&s, ExportFormat::Json)? else {
        unreachable!()
    };

    let target = platform(b.path())?;
    target.import(&json)?;
    let ExportDocument::Json(again) = target.export(&s, ExportFormat::Json)? else {
        unreachable!()
    };
    println!("json export: {} bytes, round trip identical: {}", json.len(), json == again);
    for t in &target.snapshot(&s)?.stage_transitions {
        println!("  {:?} -> {:?} forced={} ({})", t.from, t.to, t.forced, t.precondition_report);
    }
    Ok(())
}
