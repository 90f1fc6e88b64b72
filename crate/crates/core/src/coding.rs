//! Reflect-stage coding: workloads, initial codes, focused groups, and the
//! word counts behind the pre-discussion word cloud.

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::ids::{AnnotationId, GroupId, IdKind, InteractionId, ParticipantId};
use crate::model::{Annotation, CharRange, CodingStage, FocusedGroup, Stage};
use crate::state::SessionState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationWorkload {
    pub participant_id: ParticipantId,
    /// Baseline interactions first (session order), then the participant's own.
    pub interaction_ids: Vec<InteractionId>,
    pub required_baseline_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStat {
    pub token: String,
    pub count: usize,
    /// One entry per counted occurrence, so `count == source_label_ids.len()`.
    pub source_label_ids: Vec<AnnotationId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageFilter {
    Initial,
    Focused,
    #[default]
    All,
}

impl StageFilter {
    pub fn matches(self, stage: CodingStage) -> bool {
        match self {
            StageFilter::Initial => stage == CodingStage::Initial,
            StageFilter::Focused => stage == CodingStage::Focused,
            StageFilter::All => true,
        }
    }
}

/// Lowercase, NFC, split on every run of non-alphanumeric characters.
/// No stemming: "bias" and "biased" stay distinct.
pub fn normalize_label(label_raw: &str) -> Vec<String> {
    let folded: String = label_raw.to_lowercase().nfc().collect();
    folded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Normalized tokens joined by single spaces; the board's label key.
pub fn normalized_label_text(label_raw: &str) -> String {
    normalize_label(label_raw).join(" ")
}

/// Token counts over live annotations, sorted by count desc then token asc.
pub fn word_frequencies<'a>(
    annotations: impl IntoIterator<Item = &'a Annotation>,
    filter: StageFilter,
) -> Result<Vec<LabelStat>> {
    let mut by_token: BTreeMap<String, Vec<AnnotationId>> = BTreeMap::new();
    let mut matched = 0usize;
    for a in annotations {
        if !a.is_live() || !filter.matches(a.stage) {
            continue;
        }
        matched += 1;
        for token in normalize_label(&a.label_raw) {
            by_token.entry(token).or_default().push(a.id.clone());
        }
    }
    if matched == 0 {
        return Err(Error::NoAnnotations);
    }
    let mut stats: Vec<LabelStat> = by_token
        .into_iter()
        .map(|(token, source_label_ids)| LabelStat {
            count: source_label_ids.len(),
            token,
            source_label_ids,
        })
        .collect();
    // BTreeMap already yields tokens ascending; a stable sort keeps that for ties.
    stats.sort_by(|a, b| b.count.cmp(&a.count));
    Ok(stats)
}

fn workload_ids(state: &SessionState, participant: &ParticipantId) -> Vec<InteractionId> {
    let baseline = &state.session.baseline_interaction_ids;
    let mut ids = baseline.clone();
    ids.extend(
        state
            .list_interactions()
            .iter()
            .filter(|i| i.is_authored_by(participant) && !baseline.contains(&i.id))
            .map(|i| i.id.clone()),
    );
    ids
}

pub fn assign_workload(
    state: &SessionState,
    participant: &ParticipantId,
) -> Result<AnnotationWorkload> {
    state.require_stage(&[Stage::ReflectInitial, Stage::ReflectFocused])?;
    state.require_participant(participant)?;
    Ok(AnnotationWorkload {
        participant_id: participant.clone(),
        interaction_ids: workload_ids(state, participant),
        required_baseline_count: state.session.baseline_interaction_ids.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotateRequest {
    pub participant_id: ParticipantId,
    pub interaction_id: InteractionId,
    pub turn_index: usize,
    #[serde(default)]
    pub char_range: Option<CharRange>,
    pub label_raw: String,
}

/// Record an initial code on a model turn. The label is stored verbatim.
pub fn annotate(
    state: &mut SessionState,
    now: DateTime<Utc>,
    req: AnnotateRequest,
) -> Result<Annotation> {
    state.require_stage(&[Stage::ReflectInitial])?;
    state.require_participant(&req.participant_id)?;
    if !workload_ids(state, &req.participant_id).contains(&req.interaction_id) {
        state.interaction(&req.interaction_id)?;
        return Err(Error::NotInWorkload(req.interaction_id.to_string()));
    }
    let text = state.model_turn(&req.interaction_id, req.turn_index)?;
    if let Some(r) = &req.char_range {
        r.check_within(text)?;
    }
    if req.label_raw.trim().is_empty() {
        return Err(Error::Validation("label is empty".into()));
    }
    let annotation = Annotation {
        id: AnnotationId(state.mint(IdKind::Annotation)),
        participant_id: req.participant_id,
        interaction_id: req.interaction_id,
        turn_index: req.turn_index,
        char_range: req.char_range,
        label_raw: req.label_raw,
        stage: CodingStage::Initial,
        group_id: None,
        deleted_at: None,
        created_at: now,
    };
    state.put_annotation(annotation.clone())?;
    Ok(annotation)
}

/// Soft-delete one of the participant's own ungrouped initial codes.
pub fn retract_annotation(
    state: &mut SessionState,
    now: DateTime<Utc>,
    participant: &ParticipantId,
    annotation: &AnnotationId,
) -> Result<Annotation> {
    state.require_stage(&[Stage::ReflectInitial])?;
    let mut a = state.annotation(annotation)?.clone();
    if &a.participant_id != participant {
        return Err(Error::InvariantViolation(
            "participants can only retract their own codes".into(),
        ));
    }
    if a.deleted_at.is_some() {
        return Ok(a);
    }
    a.deleted_at = Some(now);
    state.put_annotation(a.clone())?;
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRequest {
    pub participant_id: ParticipantId,
    pub group_label: String,
    pub annotation_ids: Vec<AnnotationId>,
}

/// Focused coding: cluster a participant's initial codes under one label.
/// Also records a derived focused annotation carrying the group label.
pub fn group_codes(
    state: &mut SessionState,
    now: DateTime<Utc>,
    req: GroupRequest,
) -> Result<FocusedGroup> {
    state.require_stage(&[Stage::ReflectFocused])?;
    state.require_participant(&req.participant_id)?;
    if req.annotation_ids.is_empty() {
        return Err(Error::Validation("a focused group needs at least one code".into()));
    }
    if req.group_label.trim().is_empty() {
        return Err(Error::Validation("group label is empty".into()));
    }
    for id in &req.annotation_ids {
        let a = state.annotation(id)?;
        if a.participant_id != req.participant_id {
            return Err(Error::CrossParticipantGrouping(id.to_string()));
        }
        if a.stage != CodingStage::Initial || !a.is_live() {
            return Err(Error::InvariantViolation(format!(
                "{id} is not a live initial code"
            )));
        }
    }
    let anchor = state.annotation(&req.annotation_ids[0])?.clone();
    let group_id = GroupId(state.mint(IdKind::Group));
    let derived_id = AnnotationId(state.mint(IdKind::Annotation));
    let group = FocusedGroup {
        id: group_id.clone(),
        participant_id: req.participant_id.clone(),
        group_label: req.group_label.clone(),
        member_annotation_ids: req.annotation_ids,
        derived_annotation_id: derived_id.clone(),
        created_at: now,
    };
    state.put_group(group.clone())?;
    state.put_annotation(Annotation {
        id: derived_id,
        participant_id: req.participant_id,
        interaction_id: anchor.interaction_id,
        turn_index: anchor.turn_index,
        char_range: anchor.char_range,
        label_raw: req.group_label,
        stage: CodingStage::Focused,
        group_id: Some(group_id),
        deleted_at: None,
        created_at: now,
    })?;
    Ok(group)
}

pub const CSV_HEADER: [&str; 9] = [
    "annotation_id",
    "participant",
    "interaction_id",
    "turn_index",
    "char_start",
    "char_end",
    "stage",
    "label_raw",
    "created_at",
];

/// Live annotations as RFC-4180 CSV.
pub fn annotations_csv<'a>(annotations: impl IntoIterator<Item = &'a Annotation>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for a in annotations.into_iter().filter(|a| a.is_live()) {
        let (start, end) = a
            .char_range
            .map(|r| (r.start.to_string(), r.end.to_string()))
            .unwrap_or_default();
        let stage = match a.stage {
            CodingStage::Initial => "initial",
            CodingStage::Focused => "focused",
        };
        w.write_record([
            a.id.as_str(),
            a.participant_id.as_str(),
            a.interaction_id.as_str(),
            &a.turn_index.to_string(),
            &start,
            &end,
            stage,
            &a.label_raw,
            &a.created_at.to_rfc3339_opts(SecondsFormat::Millis, true),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}
