//! Domain types shared by every stage of a session.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ids::{
    AnnotationId, AttributeId, ContextId, GroupId, InteractionId, ParticipantId, SessionId,
};

/// Process stages, in the only order a session may move through them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Setup,
    Familiarize,
    Interact,
    ReflectInitial,
    ReflectFocused,
    Discuss,
    Complete,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Setup,
        Stage::Familiarize,
        Stage::Interact,
        Stage::ReflectInitial,
        Stage::ReflectFocused,
        Stage::Discuss,
        Stage::Complete,
    ];

    pub fn next(self) -> Option<Stage> {
        let idx = Stage::ALL.iter().position(|s| *s == self)?;
        Stage::ALL.get(idx + 1).copied()
    }

    /// Legal edges of the stage machine: strictly forward, one step.
    pub fn is_legal_edge(from: Stage, to: Stage) -> bool {
        from.next() == Some(to)
    }
}

/// Number of discussion segments.
pub const FINAL_SEGMENT: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRef {
    pub title: String,
    pub uri: String,
}

/// The use case under study.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentContext {
    pub id: ContextId,
    pub name: String,
    pub description: String,
    pub system_prompt: String,
    pub familiarization_docs: Vec<DocRef>,
    pub orientation_video_uri: Option<String>,
    /// Name of an LLM provider block in the server configuration.
    pub llm_config: String,
    /// Name of an embedding provider block in the server configuration.
    pub embedding_config: String,
    pub created_at: DateTime<Utc>,
}

/// Everything needed to create a [`DeploymentContext`]; the store assigns the id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewContext {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub system_prompt: String,
    #[serde(default)]
    pub familiarization_docs: Vec<DocRef>,
    #[serde(default)]
    pub orientation_video_uri: Option<String>,
    #[serde(default = "default_provider_name")]
    pub llm_config: String,
    #[serde(default = "default_provider_name")]
    pub embedding_config: String,
}

pub fn default_provider_name() -> String {
    "default".to_owned()
}

impl NewContext {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("context name is empty".into()));
        }
        if self.system_prompt.trim().is_empty() {
            return Err(Error::Validation("system_prompt is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: SessionId,
    pub context_id: ContextId,
    pub stage: Stage,
    pub participants: Vec<ParticipantId>,
    pub baseline_interaction_ids: Vec<InteractionId>,
    pub discussion_segment: Option<u8>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Participant,
    Facilitator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: ParticipantId,
    pub session_id: SessionId,
    pub pseudonym: String,
    pub role: Role,
    pub familiarize_ack: bool,
    pub reflect_initial_done: bool,
    pub reflect_focused_done: bool,
    pub created_at: DateTime<Utc>,
}

/// Completion flags a participant can raise. Flags never go back to false.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgressFlag {
    FamiliarizeAck,
    ReflectInitialDone,
    ReflectFocusedDone,
}

impl Participant {
    pub fn set_flag(&mut self, flag: ProgressFlag) {
        match flag {
            ProgressFlag::FamiliarizeAck => self.familiarize_ack = true,
            ProgressFlag::ReflectInitialDone => self.reflect_initial_done = true,
            ProgressFlag::ReflectFocusedDone => self.reflect_focused_done = true,
        }
    }

    pub fn flag(&self, flag: ProgressFlag) -> bool {
        match flag {
            ProgressFlag::FamiliarizeAck => self.familiarize_ack,
            ProgressFlag::ReflectInitialDone => self.reflect_initial_done,
            ProgressFlag::ReflectFocusedDone => self.reflect_focused_done,
        }
    }
}

/// Who wrote an interaction: a participant, or the shared baseline set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Author {
    Baseline,
    Participant(ParticipantId),
}

pub const BASELINE_AUTHOR: &str = "BASELINE";

impl Serialize for Author {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Author::Baseline => s.serialize_str(BASELINE_AUTHOR),
            Author::Participant(p) => s.serialize_str(p.as_str()),
        }
    }
}

impl<'de> Deserialize<'de> for Author {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == BASELINE_AUTHOR {
            Author::Baseline
        } else {
            Author::Participant(ParticipantId(s))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub id: InteractionId,
    pub session_id: SessionId,
    pub author: Author,
    pub turns: Vec<Turn>,
    pub topic_tags: Vec<String>,
    /// Set while the last user turn has no model reply yet.
    pub pending_reply: bool,
    pub created_at: DateTime<Utc>,
}

impl Interaction {
    /// Turns alternate user/model starting with user; a trailing user turn
    /// is only allowed while a reply is pending.
    pub fn check_alternation(&self) -> Result<()> {
        for (i, turn) in self.turns.iter().enumerate() {
            let expected = if i % 2 == 0 { Speaker::User } else { Speaker::Model };
            if turn.speaker != expected {
                return Err(Error::InvariantViolation(format!(
                    "interaction {}: turn {i} should be spoken by {expected:?}",
                    self.id
                )));
            }
        }
        let ends_on_user = self.turns.len() % 2 == 1;
        if ends_on_user != self.pending_reply {
            return Err(Error::InvariantViolation(format!(
                "interaction {}: pending_reply must be set exactly when the last turn is unanswered",
                self.id
            )));
        }
        Ok(())
    }

    pub fn is_authored_by(&self, participant: &ParticipantId) -> bool {
        matches!(&self.author, Author::Participant(p) if p == participant)
    }
}

/// Half-open span `[start, end)` counted in Unicode scalar values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharRange {
    pub start: usize,
    pub end: usize,
}

impl CharRange {
    pub fn check_within(&self, text: &str) -> Result<()> {
        let len = text.chars().count();
        if self.start >= self.end || self.end > len {
            return Err(Error::SpanOutOfBounds(format!(
                "[{}, {}) does not lie within a turn of {len} characters",
                self.start, self.end
            )));
        }
        Ok(())
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let mut indices = text.char_indices().map(|(i, _)| i).chain([text.len()]);
        let start = indices.nth(self.start).unwrap_or(text.len());
        let end = text
            .char_indices()
            .map(|(i, _)| i)
            .chain([text.len()])
            .nth(self.end)
            .unwrap_or(text.len());
        &text[start..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodingStage {
    Initial,
    Focused,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: AnnotationId,
    pub participant_id: ParticipantId,
    pub interaction_id: InteractionId,
    pub turn_index: usize,
    pub char_range: Option<CharRange>,
    pub label_raw: String,
    pub stage: CodingStage,
    /// For focused annotations: the group that produced them.
    pub group_id: Option<GroupId>,
    /// Soft-delete marker; deleted annotations stay for audit.
    pub deleted_at: Option<DateTime<Utc>>,
    pub created_at: DateTime<Utc>,
}

impl Annotation {
    pub fn is_live(&self) -> bool {
        self.deleted_at.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusedGroup {
    pub id: GroupId,
    pub participant_id: ParticipantId,
    pub group_label: String,
    pub member_annotation_ids: Vec<AnnotationId>,
    pub derived_annotation_id: AnnotationId,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeStatus {
    Proposed,
    GroupFinal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRef {
    pub interaction_id: InteractionId,
    pub turn_index: usize,
    #[serde(default)]
    pub char_range: Option<CharRange>,
}

/// A candidate alignment axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub id: AttributeId,
    pub session_id: SessionId,
    pub name: String,
    pub definition: String,
    pub proposer_ids: Vec<ParticipantId>,
    pub example_refs: Vec<ExampleRef>,
    pub status: AttributeStatus,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub participant_id: ParticipantId,
    pub segment: u8,
    pub ordered_attribute_ids: Vec<AttributeId>,
    pub submitted_at: DateTime<Utc>,
}

pub const MAX_BALLOT_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertRating {
    pub participant_id: ParticipantId,
    pub attribute_id: AttributeId,
    pub score: u8,
    pub submitted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTransition {
    pub from: Stage,
    pub to: Stage,
    pub actor: ParticipantId,
    pub forced: bool,
    pub at: DateTime<Utc>,
    pub precondition_report: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentTransition {
    pub from: u8,
    pub to: u8,
    pub actor: ParticipantId,
    pub forced: bool,
    pub at: DateTime<Utc>,
    pub precondition_report: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_edges_are_forward_single_steps() {
        assert!(Stage::is_legal_edge(Stage::Setup, Stage::Familiarize));
        assert!(!Stage::is_legal_edge(Stage::Interact, Stage::Discuss));
        assert!(!Stage::is_legal_edge(Stage::Discuss, Stage::Interact));
        assert_eq!(Stage::Complete.next(), None);
    }

    #[test]
    fn char_range_counts_scalar_values() {
        let text = "héllo wörld";
        let r = CharRange { start: 6, end: 11 };
        r.check_within(text).unwrap();
        assert_eq!(r.slice(text), "wörld");
        assert!(CharRange { start: 6, end: 12 }.check_within(text).is_err());
        assert!(CharRange { start: 3, end: 3 }.check_within(text).is_err());
    }

    #[test]
    fn author_serializes_as_plain_string() {
        let json = serde_json::to_string(&Author::Baseline).unwrap();
        assert_eq!(json, "\"BASELINE\"");
        let p: Author = serde_json::from_str("\"par-1\"").unwrap();
        assert_eq!(p, Author::Participant("par-1".into()));
    }
}
