//! Session orchestration: the stage machine, facilitator controls,
//! participant packets, export/import, and the live event feed. The HTTP
//! layer is a thin binding over [`Platform`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use crate::affinity::{
    self, AffinityLayout, EmbeddingProviderConfig, EmbeddingProviderKind, ExternalEmbedder,
    LabelEmbedding, LabelInput, Neighbor,
};
use crate::coding::{
    self, AnnotateRequest, AnnotationWorkload, GroupRequest, LabelStat, StageFilter,
};
use crate::consensus::{
    self, BordaResult, ConsensusReport, ConsensusShift, LikertRequest, RankingRequest,
};
use crate::error::{Error, Result};
use crate::ids::{AnnotationId, AttributeId, ContextId, IdKind, InteractionId, ParticipantId, SessionId};
use crate::llm::{ChatReply, ChatRequest, Gateway};
use crate::model::{
    Annotation, Attribute, AttributeStatus, DeploymentContext, ExampleRef, FocusedGroup,
    Interaction, LikertRating, NewContext, Participant, ProgressFlag, RankingRecord, Role,
    SegmentTransition, Session, Stage, StageTransition, FINAL_SEGMENT,
};
use crate::state::SessionState;
use crate::store::Store;

/// Pushed to subscribers whenever a session's stage or segment changes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Count of stage plus segment transitions so far; strictly increasing.
    pub seq: u64,
    pub kind: SessionEventKind,
    pub stage: Stage,
    pub segment: Option<u8>,
    pub forced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionEventKind {
    /// First event on every subscription: the state at connect time.
    Sync,
    StageChanged,
    SegmentChanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub token: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub topics: Vec<String>,
    pub word_cloud: Vec<WordCount>,
}

/// Pre-discussion material for one participant: their own work plus
/// group-level aggregates. Never carries another participant's codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantPacket {
    pub participant_id: ParticipantId,
    pub pseudonym: String,
    pub interactions: Vec<Interaction>,
    pub annotations: Vec<Annotation>,
    pub groups: Vec<FocusedGroup>,
    pub group_summary: GroupSummary,
    pub video_uri: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    CsvBundle,
    Markdown,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv_bundle" => Ok(ExportFormat::CsvBundle),
            "markdown" => Ok(ExportFormat::Markdown),
            other => Err(Error::UnsupportedFormat(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExportDocument {
    Json(String),
    CsvBundle(BTreeMap<String, String>),
    Markdown(String),
}

pub const EXPORT_FORMAT_VERSION: u32 = 1;

/// Lossless JSON export of a session and its context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExport {
    pub format_version: u32,
    pub context: DeploymentContext,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeRequest {
    /// Present to revise an existing attribute.
    #[serde(default)]
    pub id: Option<AttributeId>,
    pub name: String,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub proposer_ids: Vec<ParticipantId>,
    #[serde(default)]
    pub example_refs: Vec<ExampleRef>,
    #[serde(default = "proposed")]
    pub status: AttributeStatus,
}

fn proposed() -> AttributeStatus {
    AttributeStatus::Proposed
}

/// Advisory per-segment durations in minutes, surfaced to clients only.
pub type SegmentDurations = BTreeMap<u8, u32>;

struct CachedBoard {
    rev: u64,
    layout: AffinityLayout,
    embeddings: Vec<LabelEmbedding>,
}

pub struct Platform {
    store: Arc<Store>,
    gateway: Gateway,
    embedding: HashMap<String, EmbeddingProviderConfig>,
    segment_durations: SegmentDurations,
    events: Mutex<HashMap<SessionId, broadcast::Sender<SessionEvent>>>,
    boards: Mutex<HashMap<SessionId, Arc<CachedBoard>>>,
}

fn unmet_report(what: &str, who: &[&Participant]) -> (String, Vec<String>) {
    let details: Vec<String> = who
        .iter()
        .map(|p| format!("{} ({})", p.pseudonym, p.id))
        .collect();
    (format!("{what}: {}", details.join(", ")), details)
}

/// Unmet unforced preconditions for `from -> next`; empty when satisfied.
fn stage_gate(state: &SessionState, to: Stage) -> (String, Vec<String>) {
    let participants: Vec<&Participant> = state
        .list_participants()
        .iter()
        .filter(|p| p.role == Role::Participant)
        .collect();
    let missing_flag = |flag: ProgressFlag| -> Vec<&Participant> {
        participants.iter().copied().filter(|p| !p.flag(flag)).collect()
    };
    let (label, unmet): (&str, Vec<&Participant>) = match to {
        Stage::Familiarize => {
            if participants.is_empty() {
                return (
                    "roster has no participants".into(),
                    vec!["no participants".into()],
                );
            }
            ("", vec![])
        }
        Stage::Interact => (
            "familiarization not acknowledged by",
            missing_flag(ProgressFlag::FamiliarizeAck),
        ),
        Stage::ReflectInitial => (
            "no own interaction yet for",
            participants
                .iter()
                .copied()
                .filter(|p| {
                    !state
                        .list_interactions()
                        .iter()
                        .any(|i| i.is_authored_by(&p.id))
                })
                .collect(),
        ),
        Stage::ReflectFocused => (
            "initial coding not finished by",
            missing_flag(ProgressFlag::ReflectInitialDone),
        ),
        Stage::Discuss => (
            "focused coding not finished by",
            missing_flag(ProgressFlag::ReflectFocusedDone),
        ),
        Stage::Complete => {
            if state.rankings_for(FINAL_SEGMENT).next().is_none() {
                return (
                    "no segment-5 ranking submitted".into(),
                    vec!["segment-5 rankings".into()],
                );
            }
            ("", vec![])
        }
        Stage::Setup => ("", vec![]),
    };
    if unmet.is_empty() {
        (String::new(), Vec::new())
    } else {
        unmet_report(label, &unmet)
    }
}

fn require_facilitator(state: &SessionState, actor: &ParticipantId) -> Result<()> {
    match state.participant(actor) {
        Ok(p) if p.role == Role::Facilitator => Ok(()),
        _ => Err(Error::NotFacilitator(actor.to_string())),
    }
}

fn event_seq(state: &SessionState) -> u64 {
    (state.stage_transitions.len() + state.segment_transitions.len()) as u64
}

impl Platform {
    pub fn new(
        store: Arc<Store>,
        gateway: Gateway,
        embedding: HashMap<String, EmbeddingProviderConfig>,
        segment_durations: SegmentDurations,
    ) -> Self {
        Self {
            store,
            gateway,
            embedding,
            segment_durations,
            events: Mutex::new(HashMap::new()),
            boards: Mutex::new(HashMap::new()),
        }
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    pub fn segment_durations(&self) -> &SegmentDurations {
        &self.segment_durations
    }

    fn sender(&self, session: &SessionId) -> broadcast::Sender<SessionEvent> {
        self.events
            .lock()
            .unwrap()
            .entry(session.clone())
            .or_insert_with(|| broadcast::channel(256).0)
            .clone()
    }

    /// Live stage/segment changes for one session, in commit order, plus a
    /// [`SessionEventKind::Sync`] event describing the state at subscribe
    /// time. Events with `seq` at or below the sync's were already applied.
    pub fn subscribe(
        &self,
        session: &SessionId,
    ) -> Result<(SessionEvent, broadcast::Receiver<SessionEvent>)> {
        let rx = self.sender(session).subscribe();
        let st = self.store.snapshot(session)?;
        let sync = SessionEvent {
            seq: event_seq(&st),
            kind: SessionEventKind::Sync,
            stage: st.stage(),
            segment: st.session.discussion_segment,
            forced: false,
        };
        Ok((sync, rx))
    }

    // ---- setup ----

    pub fn create_context(&self, spec: NewContext) -> Result<DeploymentContext> {
        self.store.create_context(spec)
    }

    pub fn create_session(&self, context: &ContextId) -> Result<Session> {
        Ok(self.store.create_session(context)?.session.clone())
    }

    pub fn snapshot(&self, session: &SessionId) -> Result<Arc<SessionState>> {
        self.store.snapshot(session)
    }

    pub fn add_participant(
        &self,
        session: &SessionId,
        pseudonym: &str,
        role: Role,
    ) -> Result<Participant> {
        self.store.update(session, |st, now| {
            if role == Role::Participant {
                st.require_stage(&[Stage::Setup, Stage::Familiarize])?;
            }
            let p = Participant {
                id: ParticipantId(st.mint(IdKind::Participant)),
                session_id: st.session.id.clone(),
                pseudonym: pseudonym.to_owned(),
                role,
                familiarize_ack: false,
                reflect_initial_done: false,
                reflect_focused_done: false,
                created_at: now,
            };
            st.put_participant(p.clone())?;
            Ok(p)
        })
    }

    /// Raise a completion flag. Each flag can only be raised in its stage.
    pub fn mark_progress(
        &self,
        session: &SessionId,
        participant: &ParticipantId,
        flag: ProgressFlag,
    ) -> Result<Participant> {
        self.store.update(session, |st, _| {
            let stage = match flag {
                ProgressFlag::FamiliarizeAck => Stage::Familiarize,
                ProgressFlag::ReflectInitialDone => Stage::ReflectInitial,
                ProgressFlag::ReflectFocusedDone => Stage::ReflectFocused,
            };
            st.require_stage(&[stage])?;
            let mut p = st.require_participant(participant)?.clone();
            p.set_flag(flag);
            st.put_participant(p.clone())?;
            Ok(p)
        })
    }

    // ---- stage machine ----

    pub fn advance_stage(
        &self,
        session: &SessionId,
        actor: &ParticipantId,
        target: Stage,
        forced: bool,
    ) -> Result<StageTransition> {
        let sender = self.sender(session);
        self.store.update_then(
            session,
            |st, now| {
                require_facilitator(st, actor)?;
                let from = st.stage();
                if !Stage::is_legal_edge(from, target) {
                    return Err(Error::IllegalTransition { from, to: target });
                }
                let (report, details) = stage_gate(st, target);
                if !details.is_empty() && !forced {
                    return Err(Error::PreconditionFailed { report, details });
                }
                let precondition_report = if details.is_empty() {
                    "all preconditions met".to_owned()
                } else {
                    format!("bypassed: {report}")
                };
                st.session.stage = target;
                st.session.discussion_segment = (target == Stage::Discuss).then_some(1);
                let t = StageTransition {
                    from,
                    to: target,
                    actor: actor.clone(),
                    forced,
                    at: now,
                    precondition_report,
                };
                st.stage_transitions.push(t.clone());
                Ok(t)
            },
            |st, t| {
                let _ = sender.send(SessionEvent {
                    seq: event_seq(st),
                    kind: SessionEventKind::StageChanged,
                    stage: st.stage(),
                    segment: st.session.discussion_segment,
                    forced: t.forced,
                });
            },
        )
    }

    pub fn advance_segment(
        &self,
        session: &SessionId,
        actor: &ParticipantId,
        forced: bool,
    ) -> Result<SegmentTransition> {
        let sender = self.sender(session);
        self.store.update_then(
            session,
            |st, now| {
                require_facilitator(st, actor)?;
                st.require_stage(&[Stage::Discuss])?;
                let from = st.session.discussion_segment.unwrap_or(1);
                if from >= FINAL_SEGMENT {
                    return Err(Error::AtFinalSegment);
                }
                let mut details = Vec::new();
                let mut report = String::new();
                if from == 1 {
                    let ranked: BTreeSet<&ParticipantId> =
                        st.rankings_for(1).map(|r| &r.participant_id).collect();
                    let missing: Vec<&Participant> = st
                        .list_participants()
                        .iter()
                        .filter(|p| p.role == Role::Participant && !ranked.contains(&p.id))
                        .collect();
                    if !missing.is_empty() {
                        (report, details) = unmet_report("no segment-1 ranking from", &missing);
                    }
                }
                if !details.is_empty() && !forced {
                    return Err(Error::PreconditionFailed { report, details });
                }
                let precondition_report = if details.is_empty() {
                    "all preconditions met".to_owned()
                } else {
                    format!("bypassed: {report}")
                };
                st.session.discussion_segment = Some(from + 1);
                let t = SegmentTransition {
                    from,
                    to: from + 1,
                    actor: actor.clone(),
                    forced,
                    at: now,
                    precondition_report,
                };
                st.segment_transitions.push(t.clone());
                Ok(t)
            },
            |st, t| {
                let _ = sender.send(SessionEvent {
                    seq: event_seq(st),
                    kind: SessionEventKind::SegmentChanged,
                    stage: st.stage(),
                    segment: st.session.discussion_segment,
                    forced: t.forced,
                });
            },
        )
    }

    // ---- interact ----

    pub async fn send_message(&self, session: &SessionId, req: ChatRequest) -> Result<ChatReply> {
        self.gateway.send_message(session, req).await
    }

    pub async fn retry_reply(
        &self,
        session: &SessionId,
        participant: &ParticipantId,
        interaction: &InteractionId,
    ) -> Result<ChatReply> {
        self.gateway
            .retry_reply(session, participant, interaction)
            .await
    }

    pub fn load_baseline(
        &self,
        session: &SessionId,
        transcripts: &[String],
        author: Option<ParticipantId>,
    ) -> Result<Vec<InteractionId>> {
        self.gateway.load_baseline(session, transcripts, author)
    }

    // ---- reflect ----

    pub fn workload(
        &self,
        session: &SessionId,
        participant: &ParticipantId,
    ) -> Result<AnnotationWorkload> {
        coding::assign_workload(&*self.store.snapshot(session)?, participant)
    }

    pub fn annotate(&self, session: &SessionId, req: AnnotateRequest) -> Result<Annotation> {
        self.store
            .update(session, |st, now| coding::annotate(st, now, req))
    }

    pub fn retract_annotation(
        &self,
        session: &SessionId,
        participant: &ParticipantId,
        annotation: &AnnotationId,
    ) -> Result<Annotation> {
        self.store.update(session, |st, now| {
            coding::retract_annotation(st, now, participant, annotation)
        })
    }

    pub fn group_codes(&self, session: &SessionId, req: GroupRequest) -> Result<FocusedGroup> {
        self.store
            .update(session, |st, now| coding::group_codes(st, now, req))
    }

    pub fn word_frequencies(
        &self,
        session: &SessionId,
        filter: StageFilter,
    ) -> Result<Vec<LabelStat>> {
        let st = self.store.snapshot(session)?;
        coding::word_frequencies(st.list_annotations(), filter)
    }

    // ---- affinity board ----

    async fn board(&self, session: &SessionId) -> Result<Arc<CachedBoard>> {
        let st = self.store.snapshot(session)?;
        if let Some(b) = self.boards.lock().unwrap().get(session) {
            if b.rev == st.annotation_rev {
                return Ok(b.clone());
            }
        }
        let inputs: Vec<LabelInput> = st
            .live_annotations()
            .map(|a| LabelInput {
                label_raw: a.label_raw.clone(),
                annotation_id: a.id.clone(),
            })
            .collect();
        let labels = affinity::distinct_labels(&inputs);
        if labels.is_empty() {
            return Err(Error::NoAnnotations);
        }
        let ctx = self.store.context(&st.session.context_id)?;
        let cfg = self
            .embedding
            .get(&ctx.embedding_config)
            .cloned()
            .unwrap_or_default();
        let mut embeddings = None;
        if cfg.kind == EmbeddingProviderKind::ExternalModel {
            let names: Vec<String> = labels.iter().map(|(l, _)| l.clone()).collect();
            match ExternalEmbedder::from_config(&cfg) {
                Ok(client) => match client.embed(&names).await {
                    Ok(e) => embeddings = Some(e),
                    Err(e) => tracing::warn!(error = %e, "external embedder failed; using trigram fallback"),
                },
                Err(e) => tracing::warn!(error = %e, "external embedder misconfigured; using trigram fallback"),
            }
        }
        let embeddings = match embeddings {
            Some(e) => e,
            None => affinity::embed_trigram(&labels)?,
        };
        let layout = affinity::layout_from_embeddings(&labels, &embeddings)?;
        let board = Arc::new(CachedBoard {
            rev: st.annotation_rev,
            layout,
            embeddings,
        });
        self.boards
            .lock()
            .unwrap()
            .insert(session.clone(), board.clone());
        Ok(board)
    }

    pub async fn affinity_layout(&self, session: &SessionId) -> Result<AffinityLayout> {
        Ok(self.board(session).await?.layout.clone())
    }

    pub async fn nearest_neighbors(
        &self,
        session: &SessionId,
        label: &str,
        k: usize,
    ) -> Result<Vec<Neighbor>> {
        let board = self.board(session).await?;
        affinity::nearest_neighbors(&board.embeddings, label, k)
    }

    // ---- discuss ----

    pub fn put_attribute(&self, session: &SessionId, req: AttributeRequest) -> Result<Attribute> {
        self.store.update(session, |st, now| {
            st.require_stage(&[Stage::ReflectFocused, Stage::Discuss])?;
            let (id, created_at) = match &req.id {
                Some(id) => (id.clone(), st.attribute(id)?.created_at),
                None => (AttributeId(st.mint(IdKind::Attribute)), now),
            };
            let attr = Attribute {
                id,
                session_id: st.session.id.clone(),
                name: req.name,
                definition: req.definition,
                proposer_ids: req.proposer_ids,
                example_refs: req.example_refs,
                status: req.status,
                created_at,
            };
            st.put_attribute(attr.clone())?;
            Ok(attr)
        })
    }

    pub fn submit_ranking(&self, session: &SessionId, req: RankingRequest) -> Result<RankingRecord> {
        self.store
            .update(session, |st, now| consensus::submit_ranking(st, now, req))
    }

    pub fn submit_likert(&self, session: &SessionId, req: LikertRequest) -> Result<LikertRating> {
        self.store
            .update(session, |st, now| consensus::submit_likert(st, now, req))
    }

    pub fn borda(&self, session: &SessionId, segment: u8, k: usize) -> Result<BordaResult> {
        consensus::borda(&*self.store.snapshot(session)?, segment, k)
    }

    pub fn consensus_shift(&self, session: &SessionId) -> Result<ConsensusShift> {
        consensus::consensus_shift(&*self.store.snapshot(session)?)
    }

    pub fn report(&self, session: &SessionId, forced: bool) -> Result<ConsensusReport> {
        let st = self.store.snapshot(session)?;
        consensus::build_report(&st, self.store.now(), forced)
    }

    // ---- packets & export ----

    pub fn participant_packet(
        &self,
        session: &SessionId,
        participant: &ParticipantId,
    ) -> Result<ParticipantPacket> {
        let st = self.store.snapshot(session)?;
        st.require_stage(&[Stage::ReflectFocused, Stage::Discuss])?;
        let me = st.require_participant(participant)?;
        let ctx = self.store.context(&st.session.context_id)?;

        let baseline = &st.session.baseline_interaction_ids;
        let interactions: Vec<Interaction> = st
            .list_interactions()
            .iter()
            .filter(|i| baseline.contains(&i.id) || i.is_authored_by(participant))
            .cloned()
            .collect();
        let annotations: Vec<Annotation> = st
            .live_annotations()
            .filter(|a| &a.participant_id == participant)
            .cloned()
            .collect();
        let groups: Vec<FocusedGroup> = st
            .list_groups()
            .iter()
            .filter(|g| &g.participant_id == participant)
            .cloned()
            .collect();
        let topics: BTreeSet<String> = st
            .list_interactions()
            .iter()
            .flat_map(|i| i.topic_tags.iter().cloned())
            .collect();
        let word_cloud = match coding::word_frequencies(st.list_annotations(), StageFilter::All) {
            Ok(stats) => stats
                .into_iter()
                .map(|s| WordCount {
                    token: s.token,
                    count: s.count,
                })
                .collect(),
            Err(Error::NoAnnotations) => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok(ParticipantPacket {
            participant_id: participant.clone(),
            pseudonym: me.pseudonym.clone(),
            interactions,
            annotations,
            groups,
            group_summary: GroupSummary {
                topics: topics.into_iter().collect(),
                word_cloud,
            },
            video_uri: ctx.orientation_video_uri.clone(),
        })
    }

    pub fn export(&self, session: &SessionId, format: ExportFormat) -> Result<ExportDocument> {
        let st = self.store.snapshot(session)?;
        let ctx = self.store.context(&st.session.context_id)?;
        Ok(match format {
            ExportFormat::Json => ExportDocument::Json(export_json(&ctx, &st)?),
            ExportFormat::CsvBundle => ExportDocument::CsvBundle(csv_bundle(&st)?),
            ExportFormat::Markdown => {
                let report = consensus::build_report(&st, st.session.updated_at, true)?;
                ExportDocument::Markdown(consensus::render_markdown(&report, &ctx.name))
            }
        })
    }

    /// Recreate a session from a JSON export.
    pub fn import(&self, json: &str) -> Result<Session> {
        let doc: SessionExport = serde_json::from_str(json)?;
        if doc.format_version != EXPORT_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported export format version {}",
                doc.format_version
            )));
        }
        Ok(self
            .store
            .import_session(doc.context, doc.state)?
            .session
            .clone())
    }
}

pub fn export_json(ctx: &DeploymentContext, state: &SessionState) -> Result<String> {
    let doc = SessionExport {
        format_version: EXPORT_FORMAT_VERSION,
        context: ctx.clone(),
        state: state.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

fn csv_bundle(st: &SessionState) -> Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    files.insert(
        "annotations.csv".to_owned(),
        coding::annotations_csv(st.list_annotations())?,
    );

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(["participant", "segment", "position", "attribute_id", "submitted_at"])?;
    for r in &st.rankings {
        for (pos, a) in r.ordered_attribute_ids.iter().enumerate() {
            w.write_record([
                r.participant_id.as_str(),
                &r.segment.to_string(),
                &(pos + 1).to_string(),
                a.as_str(),
                &r.submitted_at.to_rfc3339_opts(SecondsFormat::Millis, true),
            ])?;
        }
    }
    files.insert("rankings.csv".to_owned(), into_string(w)?);

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(["participant", "attribute_id", "score", "submitted_at"])?;
    for l in &st.likert {
        w.write_record([
            l.participant_id.as_str(),
            l.attribute_id.as_str(),
            &l.score.to_string(),
            &l.submitted_at.to_rfc3339_opts(SecondsFormat::Millis, true),
        ])?;
    }
    files.insert("likert.csv".to_owned(), into_string(w)?);
    Ok(files)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}
