//! Count label words across initial codes, as a facilitator would before
//! the focused-coding pass.
//!
//!     cargo run --example word_cloud

use std::sync::Arc;

use axis_elicit::clock::SystemClock;
use axis_elicit::coding::{AnnotateRequest, StageFilter};
use axis_elicit::fixtures;
use axis_elicit::llm::{ChatRequest, Gateway, LlmProviderConfig, MockEcho, RetryPolicy};
use axis_elicit::model::{NewContext, ProgressFlag, Role, Stage};
use axis_elicit::session::Platform;
use axis_elicit::store::Store;

#[tokio::main]
async fn main() -> axis_elicit::Result<()> {
    let dir = tempfile::tempdir()?;
    let store = Arc::new(Store::open(dir.path(), Arc::new(SystemClock))?);
    let mut gateway = Gateway::new(store.clone(), RetryPolicy::default());
    gateway.register("default", LlmProviderConfig::mock_echo(), Arc::new(MockEcho::new()));
    let platform = Platform::new(store, gateway, Default::default(), Default::default());

    let ctx = platform.create_context(NewContext {
        name: "History assistant".into(),
        description: "Word cloud demo".into(),
        system_prompt: fixtures::SYSTEM_PROMPT.into(),
        familiarization_docs: vec![],
        orientation_video_uri: None,
        llm_config: "default".into(),
        embedding_config: "default".into(),
    })?;
    let s = platform.create_session(&ctx.id)?.id;
    let f = platform.add_participant(&s, "facilitator", Role::Facilitator)?.id;
    let p = platform.add_participant(&s, "coder", Role::Participant)?.id;
    let baseline = platform.load_baseline(&s, &[fixtures::BASELINE_THANKSGIVING.into()], None)?;

    platform.advance_stage(&s, &f, Stage::Familiarize, false)?;
    platform.mark_progress(&s, &p, ProgressFlag::FamiliarizeAck)?;
    platform.advance_stage(&s, &f, Stage::Interact, false)?;
    platform
        .send_message(
            &s,
            ChatRequest {
                participant_id: p.clone(),
                interaction_id: None,
                user_text: "What is Diwali?".into(),
                topic_tags: vec![],
            },
        )
        .await?;
    platform.advance_stage(&s, &f, Stage::ReflectInitial, false)?;

    for label in fixtures::mit_initial_labels() {
        platform.annotate(
            &s,
            AnnotateRequest {
                participant_id: p.clone(),
                interaction_id: baseline[0].clone(),
                turn_index: 1,
                char_range: None,
                label_raw: label.into(),
            },
        )?;
    }

    for stat in platform.word_frequencies(&s, StageFilter::Initial)?.iter().take(12) {
        println!("{:>3}  {}", stat.count, stat.token);
    }
    Ok(())
}
