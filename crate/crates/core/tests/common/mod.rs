#![allow(dead_code)]
pub mod api;
pub mod oracles;

use std::collections::HashMap;
use std::sync::Arc;

use axis_elicit::clock::ManualClock;
use axis_elicit::coding::{AnnotateRequest, GroupRequest};
use axis_elicit::fixtures;
use axis_elicit::ids::{AnnotationId, AttributeId, InteractionId, ParticipantId, SessionId};
use axis_elicit::llm::{ChatRequest, Gateway, LlmProviderConfig, MockEcho, ReplayLog, RetryPolicy};
use axis_elicit::model::{AttributeStatus, NewContext, ProgressFlag, Role, Stage};
use axis_elicit::session::{AttributeRequest, Platform};
use axis_elicit::store::Store;
use tempfile::TempDir;

pub struct Harness {
    pub dir: TempDir,
    pub clock: Arc<ManualClock>,
    pub echo: Arc<MockEcho>,
    pub platform: Arc<Platform>,
}

/// Temp dir on tmpfs when the host has one; store commits fsync.
pub fn scratch_dir() -> TempDir {
    let shm = std::path::Path::new("/dev/shm");
    if shm.is_dir() {
        if let Ok(d) = tempfile::tempdir_in(shm) {
            return d;
        }
    }
    tempfile::tempdir().unwrap()
}

/// A platform over a fresh temp store with `default` = mock echo and
/// `replay` = the bundled replay log.
pub fn harness() -> Harness {
    let dir = scratch_dir();
    let clock = Arc::new(ManualClock::fixed());
    let store = Arc::new(Store::open(dir.path(), clock.clone()).unwrap());
    let echo = Arc::new(MockEcho::new());
    let mut gateway = Gateway::new(store.clone(), RetryPolicy::immediate(3));
    gateway.register("default", LlmProviderConfig::mock_echo(), echo.clone());
    let mut replay_cfg = LlmProviderConfig::mock_echo();
    replay_cfg.provider_kind = axis_elicit::llm::ProviderKind::ReplayLog;
    gateway.register(
        "replay",
        replay_cfg,
        Arc::new(ReplayLog::from_transcripts(&[fixtures::REPLAY_LOG]).unwrap()),
    );
    let platform = Arc::new(Platform::new(store, gateway, HashMap::new(), Default::default()));
    Harness {
        dir,
        clock,
        echo,
        platform,
    }
}

pub fn new_context(llm: &str) -> NewContext {
    NewContext {
        name: "History assistant".into(),
        description: "Education deployment".into(),
        system_prompt: fixtures::SYSTEM_PROMPT.into(),
        familiarization_docs: vec![],
        orientation_video_uri: Some("https://example.org/orientation.mp4".into()),
        llm_config: llm.into(),
        embedding_config: "default".into(),
    }
}

pub struct Roster {
    pub session: SessionId,
    pub facilitator: ParticipantId,
    pub participants: Vec<ParticipantId>,
    pub baseline: Vec<InteractionId>,
}

/// A session in Setup with a facilitator, `n` participants and the
/// Thanksgiving baseline loaded.
pub fn roster(h: &Harness, n: usize) -> Roster {
    let ctx = h.platform.create_context(new_context("default")).unwrap();
    let session = h.platform.create_session(&ctx.id).unwrap().id;
    let facilitator = h
        .platform
        .add_participant(&session, "facilitator", Role::Facilitator)
        .unwrap()
        .id;
    let participants = (0..n)
        .map(|i| {
            h.platform
                .add_participant(&session, &format!("p{i}"), Role::Participant)
                .unwrap()
                .id
        })
        .collect();
    let baseline = h
        .platform
        .load_baseline(&session, &[fixtures::BASELINE_THANKSGIVING.to_owned()], None)
        .unwrap();
    Roster {
        session,
        facilitator,
        participants,
        baseline,
    }
}

impl Roster {
    pub fn advance(&self, h: &Harness, to: Stage) {
        h.platform
            .advance_stage(&self.session, &self.facilitator, to, false)
            .unwrap();
    }

    pub fn flag_all(&self, h: &Harness, flag: ProgressFlag) {
        for p in &self.participants {
            h.platform.mark_progress(&self.session, p, flag).unwrap();
        }
    }
}

/// Drive a roster to Interact and let every participant chat once.
pub async fn through_interact(h: &Harness, r: &Roster) -> Vec<InteractionId> {
    r.advance(h, Stage::Familiarize);
    r.flag_all(h, ProgressFlag::FamiliarizeAck);
    r.advance(h, Stage::Interact);
    let mut own = Vec::new();
    for (i, p) in r.participants.iter().enumerate() {
        let reply = h
            .platform
            .send_message(
                &r.session,
                ChatRequest {
                    participant_id: p.clone(),
                    interaction_id: None,
                    user_text: format!("Question {i} about the Mughal empire"),
                    topic_tags: vec![format!("topic-{i}")],
                },
            )
            .await
            .unwrap();
        own.push(reply.interaction_id);
    }
    own
}

/// Every participant codes the baseline model turn with `labels[i]`.
pub fn code_baseline(h: &Harness, r: &Roster, labels: &[&str]) -> Vec<AnnotationId> {
    r.participants
        .iter()
        .zip(labels)
        .map(|(p, label)| {
            h.platform
                .annotate(
                    &r.session,
                    AnnotateRequest {
                        participant_id: p.clone(),
                        interaction_id: r.baseline[0].clone(),
                        turn_index: 1,
                        char_range: None,
                        label_raw: (*label).into(),
                    },
                )
                .unwrap()
                .id
        })
        .collect()
}

pub fn group_one(h: &Harness, r: &Roster, p: &ParticipantId, label: &str, ids: Vec<AnnotationId>) {
    h.platform
        .group_codes(
            &r.session,
            GroupRequest {
                participant_id: p.clone(),
                group_label: label.into(),
                annotation_ids: ids,
            },
        )
        .unwrap();
}

pub fn final_attribute(h: &Harness, r: &Roster, name: &str, definition: &str) -> AttributeId {
    h.platform
        .put_attribute(
            &r.session,
            AttributeRequest {
                id: None,
                name: name.into(),
                definition: definition.into(),
                proposer_ids: vec![r.participants[0].clone()],
                example_refs: vec![],
                status: AttributeStatus::GroupFinal,
            },
        )
        .unwrap()
        .id
}

/// Drive a roster from Setup to Discuss, Segment 1.
pub async fn to_discuss(h: &Harness, r: &Roster) -> Vec<InteractionId> {
    let own = through_interact(h, r).await;
    r.advance(h, Stage::ReflectInitial);
    r.flag_all(h, ProgressFlag::ReflectInitialDone);
    r.advance(h, Stage::ReflectFocused);
    r.flag_all(h, ProgressFlag::ReflectFocusedDone);
    r.advance(h, Stage::Discuss);
    own
}

pub fn rank(h: &Harness, r: &Roster, p: &ParticipantId, segment: u8, ids: &[&AttributeId]) {
    h.platform
        .submit_ranking(
            &r.session,
            axis_elicit::consensus::RankingRequest {
                participant_id: p.clone(),
                segment,
                ordered_attribute_ids: ids.iter().map(|a| (*a).clone()).collect(),
            },
        )
        .unwrap();
}

/// Advance Discuss segments until `to`, unforced.
pub fn segment_to(h: &Harness, r: &Roster, to: u8) {
    loop {
        let st = h.platform.snapshot(&r.session).unwrap();
        if st.session.discussion_segment == Some(to) {
            return;
        }
        h.platform
            .advance_segment(&r.session, &r.facilitator, false)
            .unwrap();
    }
}

/// A Complete session: everyone codes, groups, ranks in Segments 1 and 5
/// and rates every final axis.
pub async fn full_session(h: &Harness, n: usize) -> (Roster, Vec<AttributeId>) {
    let r = roster(h, n);
    let own = through_interact(h, &r).await;
    r.advance(h, Stage::ReflectInitial);
    let words = ["bias", "biased", "too short", "Empathy", "dry tone", "factual"];
    for (i, p) in r.participants.iter().enumerate() {
        for (j, target) in [&r.baseline[0], &own[i]].into_iter().enumerate() {
            h.platform
                .annotate(
                    &r.session,
                    AnnotateRequest {
                        participant_id: p.clone(),
                        interaction_id: target.clone(),
                        turn_index: 1,
                        char_range: None,
                        label_raw: words[(i + j) % words.len()].into(),
                    },
                )
                .unwrap();
        }
    }
    r.flag_all(h, ProgressFlag::ReflectInitialDone);
    r.advance(h, Stage::ReflectFocused);
    let st = h.platform.snapshot(&r.session).unwrap();
    for p in &r.participants {
        let mine: Vec<AnnotationId> = st
            .live_annotations()
            .filter(|a| &a.participant_id == p)
            .map(|a| a.id.clone())
            .collect();
        group_one(h, &r, p, "accuracy", mine);
    }
    r.flag_all(h, ProgressFlag::ReflectFocusedDone);
    r.advance(h, Stage::Discuss);
    let attrs: Vec<AttributeId> = fixtures::mit_axes()
        .iter()
        .take(4)
        .map(|a| final_attribute(h, &r, &a.name, &a.definition))
        .collect();
    for (i, p) in r.participants.iter().enumerate() {
        let mut order: Vec<&AttributeId> = attrs.iter().collect();
        order.rotate_left(i % attrs.len());
        rank(h, &r, p, 1, &order);
    }
    segment_to(h, &r, 5);
    for (i, p) in r.participants.iter().enumerate() {
        let mut order: Vec<&AttributeId> = attrs.iter().collect();
        order.rotate_left((i / 2) % attrs.len());
        rank(h, &r, p, 5, &order);
        for (j, a) in attrs.iter().enumerate() {
            h.platform
                .submit_likert(
                    &r.session,
                    axis_elicit::consensus::LikertRequest {
                        participant_id: p.clone(),
                        attribute_id: a.clone(),
                        score: (1 + (i + j) % 5) as u8,
                    },
                )
                .unwrap();
        }
    }
    r.advance(h, Stage::Complete);
    (r, attrs)
}
