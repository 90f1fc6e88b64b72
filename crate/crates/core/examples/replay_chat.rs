//! Load the shared baseline transcript and chat against a replay log,
//! then print what the gateway stored.
//!
//!     cargo run --example replay_chat

use std::sync::Arc;

use axis_elicit::clock::SystemClock;
use axis_elicit::fixtures;
use axis_elicit::llm::{ChatRequest, Gateway, LlmProviderConfig, ProviderKind, ReplayLog, RetryPolicy};
use axis_elicit::model::{Author, NewContext, ProgressFlag, Role, Stage};
use axis_elicit::session::Platform;
use axis_elicit::store::Store;

#[tokio::main]
async fn main() -> axis_elicit::Result<()> {
    let dir = tempfile::tempdir()?;
    let store = Arc::new(Store::open(dir.path(), Arc::new(SystemClock))?);
    let mut gateway = Gateway::new(store.clone(), RetryPolicy::default());
    let mut cfg = LlmProviderConfig::mock_echo();
    cfg.provider_kind = ProviderKind::ReplayLog;
    cfg.model_name = "replay".into();
    gateway.register("replay", cfg, Arc::new(ReplayLog::from_transcripts(&[fixtures::REPLAY_LOG])?));
    let platform = Platform::new(store, gateway, Default::default(), Default::default());

    let ctx = platform.create_context(NewContext {
        name: "History assistant".into(),
        description: "Replay demo".into(),
        system_prompt: fixtures::SYSTEM_PROMPT.into(),
        familiarization_docs: vec![],
        orientation_video_uri: None,
        llm_config: "replay".into(),
        embedding_config: "default".into(),
    })?;
    let s = platform.create_session(&ctx.id)?.id;
    let f = platform.add_participant(&s, "facilitator", Role::Facilitator)?.id;
    let p = platform.add_participant(&s, "student", Role::Participant)?.id;
    platform.load_baseline(&s, &[fixtures::BASELINE_THANKSGIVING.into()], None)?;
    platform.advance_stage(&s, &f, Stage::Familiarize, false)?;
    platform.mark_progress(&s, &p, ProgressFlag::FamiliarizeAck)?;
    platform.advance_stage(&s, &f, Stage::Interact, false)?;

    let mut interaction = None;
    for text in ["What caused the partition of Bengal in 1905?", "How did people respond?"] {
        let reply = platform
            .send_message(
                &s,
                ChatRequest {
                    participant_id: p.clone(),
                    interaction_id: interaction.clone(),
                    user_text: text.into(),
                    topic_tags: vec!["colonial india".into()],
                },
            )
            .await?;
        interaction = Some(reply.interaction_id);
    }

    let st = platform.snapshot(&s)?;
    for i in st.list_interactions() {
        let author = match &i.author {
            Author::Baseline => "baseline".to_owned(),
            Author::Participant(p) => p.to_string(),
        };
        println!("== {} ({author})", i.id);
        for t in &i.turns {
            println!("{:?}: {}", t.speaker, t.text);
        }
    }
    Ok(())
}
