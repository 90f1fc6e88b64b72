//! In-memory document for one session, with typed put/get/list access.
//!
//! Every `put_*` checks the invariants local to the entity it writes.
//! [`SessionState::check_integrity`] checks referential closure over the
//! whole document and runs before every commit.

use std::collections::{HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{
    self, AnnotationId, AttributeId, GroupId, IdKind, InteractionId, ParticipantId,
};
use crate::model::{
    Annotation, Attribute, AttributeStatus, Author, CodingStage, FocusedGroup, Interaction,
    LikertRating, Participant, RankingRecord, SegmentTransition, Session, Speaker, Stage,
    StageTransition, MAX_BALLOT_LEN,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session: Session,
    pub next_seq: u64,
    /// Bumped on every annotation or grouping change.
    pub annotation_rev: u64,
    pub participants: Vec<Participant>,
    pub interactions: Vec<Interaction>,
    pub annotations: Vec<Annotation>,
    pub groups: Vec<FocusedGroup>,
    pub attributes: Vec<Attribute>,
    pub rankings: Vec<RankingRecord>,
    pub likert: Vec<LikertRating>,
    pub stage_transitions: Vec<StageTransition>,
    pub segment_transitions: Vec<SegmentTransition>,
    pub superseded_rankings: Vec<RankingRecord>,
    pub superseded_likert: Vec<LikertRating>,
}

trait Keyed {
    type Key: Eq;
    fn key(&self) -> &Self::Key;
    fn created(&self) -> DateTime<Utc>;
}

macro_rules! keyed {
    ($ty:ty, $key:ty) => {
        impl Keyed for $ty {
            type Key = $key;
            fn key(&self) -> &$key {
                &self.id
            }
            fn created(&self) -> DateTime<Utc> {
                self.created_at
            }
        }
    };
}

keyed!(Participant, ParticipantId);
keyed!(Interaction, InteractionId);
keyed!(Annotation, AnnotationId);
keyed!(FocusedGroup, GroupId);
keyed!(Attribute, AttributeId);

/// Insert or replace, keeping the collection ordered by `(created_at, id)`.
fn upsert<T: Keyed>(items: &mut Vec<T>, item: T)
where
    T::Key: Ord,
{
    if let Some(pos) = items.iter().position(|x| x.key() == item.key()) {
        items.remove(pos);
    }
    let pos = items
        .partition_point(|x| (x.created(), x.key()) < (item.created(), item.key()));
    items.insert(pos, item);
}

fn find<'a, T: Keyed>(items: &'a [T], key: &T::Key, kind: &'static str) -> Result<&'a T>
where
    T::Key: std::fmt::Display,
{
    items
        .iter()
        .find(|x| x.key() == key)
        .ok_or_else(|| Error::not_found(kind, key.to_string()))
}

impl SessionState {
    pub fn new(session: Session) -> Self {
        Self {
            session,
            next_seq: 0,
            annotation_rev: 0,
            participants: Vec::new(),
            interactions: Vec::new(),
            annotations: Vec::new(),
            groups: Vec::new(),
            attributes: Vec::new(),
            rankings: Vec::new(),
            likert: Vec::new(),
            stage_transitions: Vec::new(),
            segment_transitions: Vec::new(),
            superseded_rankings: Vec::new(),
            superseded_likert: Vec::new(),
        }
    }

    pub fn mint(&mut self, kind: IdKind) -> String {
        self.next_seq += 1;
        ids::entity_id(&self.session.id, kind, self.next_seq)
    }

    pub fn stage(&self) -> Stage {
        self.session.stage
    }

    pub fn require_stage(&self, allowed: &[Stage]) -> Result<()> {
        if allowed.contains(&self.session.stage) {
            return Ok(());
        }
        let expected = allowed
            .iter()
            .map(|s| format!("{s:?}"))
            .collect::<Vec<_>>()
            .join(" or ");
        Err(Error::WrongStage {
            expected,
            actual: self.session.stage,
        })
    }

    // ---- participants ----

    pub fn put_participant(&mut self, p: Participant) -> Result<()> {
        if p.session_id != self.session.id {
            return Err(Error::ReferentialIntegrity(format!(
                "participant {} belongs to session {}",
                p.id, p.session_id
            )));
        }
        if p.pseudonym.trim().is_empty() {
            return Err(Error::Validation("pseudonym is empty".into()));
        }
        if self
            .participants
            .iter()
            .any(|q| q.id != p.id && q.pseudonym == p.pseudonym)
        {
            return Err(Error::InvariantViolation(format!(
                "pseudonym `{}` already used in this session",
                p.pseudonym
            )));
        }
        if let Some(prev) = self.participants.iter().find(|q| q.id == p.id) {
            let regressed = (prev.familiarize_ack && !p.familiarize_ack)
                || (prev.reflect_initial_done && !p.reflect_initial_done)
                || (prev.reflect_focused_done && !p.reflect_focused_done);
            if regressed {
                return Err(Error::InvariantViolation(format!(
                    "completion flags of {} cannot be unset",
                    p.id
                )));
            }
        } else {
            self.session.participants.push(p.id.clone());
        }
        upsert(&mut self.participants, p);
        Ok(())
    }

    pub fn participant(&self, id: &ParticipantId) -> Result<&Participant> {
        find(&self.participants, id, "participant")
    }

    pub fn require_participant(&self, id: &ParticipantId) -> Result<&Participant> {
        self.participant(id)
            .map_err(|_| Error::UnknownParticipant(id.to_string()))
    }

    pub fn list_participants(&self) -> &[Participant] {
        &self.participants
    }

    // ---- interactions ----

    pub fn put_interaction(&mut self, i: Interaction) -> Result<()> {
        if i.session_id != self.session.id {
            return Err(Error::ReferentialIntegrity(format!(
                "interaction {} belongs to session {}",
                i.id, i.session_id
            )));
        }
        if let Author::Participant(p) = &i.author {
            self.participant(p).map_err(|_| {
                Error::ReferentialIntegrity(format!("interaction author {p} does not exist"))
            })?;
        }
        i.check_alternation()?;
        if let Some(prev) = self.interactions.iter().find(|x| x.id == i.id) {
            let is_prefix = prev.turns.len() <= i.turns.len()
                && prev.turns.iter().zip(&i.turns).all(|(a, b)| a == b);
            if !is_prefix || prev.author != i.author {
                return Err(Error::InvariantViolation(format!(
                    "turns of interaction {} are append-only",
                    i.id
                )));
            }
        }
        upsert(&mut self.interactions, i);
        Ok(())
    }

    pub fn interaction(&self, id: &InteractionId) -> Result<&Interaction> {
        find(&self.interactions, id, "interaction")
    }

    pub fn list_interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    // ---- annotations ----

    pub fn put_annotation(&mut self, a: Annotation) -> Result<()> {
        self.participant(&a.participant_id).map_err(|_| {
            Error::ReferentialIntegrity(format!("participant {} does not exist", a.participant_id))
        })?;
        let interaction = self.interaction(&a.interaction_id).map_err(|_| {
            Error::ReferentialIntegrity(format!("interaction {} does not exist", a.interaction_id))
        })?;
        let turn = interaction.turns.get(a.turn_index).ok_or_else(|| {
            Error::SpanOutOfBounds(format!(
                "turn {} of an interaction with {} turns",
                a.turn_index,
                interaction.turns.len()
            ))
        })?;
        if let Some(range) = &a.char_range {
            range.check_within(&turn.text)?;
        }
        if a.label_raw.trim().is_empty() {
            return Err(Error::Validation("label is empty".into()));
        }
        if let Some(prev) = self.annotations.iter().find(|x| x.id == a.id) {
            let same_content = prev.label_raw == a.label_raw
                && prev.participant_id == a.participant_id
                && prev.interaction_id == a.interaction_id
                && prev.turn_index == a.turn_index
                && prev.char_range == a.char_range
                && prev.stage == a.stage;
            if !same_content || (prev.deleted_at.is_some() && a.deleted_at.is_none()) {
                return Err(Error::InvariantViolation(format!(
                    "annotation {} can only be soft-deleted, not edited",
                    a.id
                )));
            }
        }
        upsert(&mut self.annotations, a);
        self.annotation_rev += 1;
        Ok(())
    }

    pub fn annotation(&self, id: &AnnotationId) -> Result<&Annotation> {
        find(&self.annotations, id, "annotation")
    }

    pub fn list_annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn live_annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(|a| a.is_live())
    }

    // ---- focused groups ----

    pub fn put_group(&mut self, g: FocusedGroup) -> Result<()> {
        self.participant(&g.participant_id).map_err(|_| {
            Error::ReferentialIntegrity(format!("participant {} does not exist", g.participant_id))
        })?;
        if g.member_annotation_ids.is_empty() {
            return Err(Error::Validation("a focused group needs at least one code".into()));
        }
        if g.group_label.trim().is_empty() {
            return Err(Error::Validation("group label is empty".into()));
        }
        let mut seen = HashSet::new();
        for id in &g.member_annotation_ids {
            let a = self.annotation(id).map_err(|_| {
                Error::ReferentialIntegrity(format!("annotation {id} does not exist"))
            })?;
            if a.participant_id != g.participant_id {
                return Err(Error::CrossParticipantGrouping(id.to_string()));
            }
            if a.stage != CodingStage::Initial || !a.is_live() {
                return Err(Error::InvariantViolation(format!(
                    "only live initial codes can be grouped; {id} is not"
                )));
            }
            if !seen.insert(id) {
                return Err(Error::DoubleGrouping(id.to_string()));
            }
        }
        let already = self.groups.iter().any(|other| {
            other.id != g.id
                && other.participant_id == g.participant_id
                && other
                    .member_annotation_ids
                    .iter()
                    .any(|m| g.member_annotation_ids.contains(m))
        });
        if already {
            let dup = g
                .member_annotation_ids
                .iter()
                .find(|m| {
                    self.groups.iter().any(|o| {
                        o.id != g.id
                            && o.participant_id == g.participant_id
                            && o.member_annotation_ids.contains(m)
                    })
                })
                .expect("duplicate exists");
            return Err(Error::DoubleGrouping(dup.to_string()));
        }
        upsert(&mut self.groups, g);
        self.annotation_rev += 1;
        Ok(())
    }

    pub fn group(&self, id: &GroupId) -> Result<&FocusedGroup> {
        find(&self.groups, id, "group")
    }

    pub fn list_groups(&self) -> &[FocusedGroup] {
        &self.groups
    }

    // ---- attributes ----

    pub fn put_attribute(&mut self, a: Attribute) -> Result<()> {
        if a.session_id != self.session.id {
            return Err(Error::ReferentialIntegrity(format!(
                "attribute {} belongs to session {}",
                a.id, a.session_id
            )));
        }
        if a.name.trim().is_empty() {
            return Err(Error::Validation("attribute name is empty".into()));
        }
        for p in &a.proposer_ids {
            self.participant(p).map_err(|_| {
                Error::ReferentialIntegrity(format!("proposer {p} does not exist"))
            })?;
        }
        for ex in &a.example_refs {
            let i = self.interaction(&ex.interaction_id).map_err(|_| {
                Error::ReferentialIntegrity(format!(
                    "example interaction {} does not exist",
                    ex.interaction_id
                ))
            })?;
            let turn = i.turns.get(ex.turn_index).ok_or_else(|| {
                Error::SpanOutOfBounds(format!("example turn {} does not exist", ex.turn_index))
            })?;
            if let Some(r) = &ex.char_range {
                r.check_within(&turn.text)?;
            }
        }
        if a.status == AttributeStatus::GroupFinal {
            let folded = a.name.trim().to_lowercase();
            let clash = self.attributes.iter().any(|o| {
                o.id != a.id
                    && o.status == AttributeStatus::GroupFinal
                    && o.name.trim().to_lowercase() == folded
            });
            if clash {
                return Err(Error::InvariantViolation(format!(
                    "a group-final attribute named `{}` already exists",
                    a.name
                )));
            }
        }
        upsert(&mut self.attributes, a);
        Ok(())
    }

    pub fn attribute(&self, id: &AttributeId) -> Result<&Attribute> {
        find(&self.attributes, id, "attribute")
    }

    pub fn list_attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn group_final_attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.attributes
            .iter()
            .filter(|a| a.status == AttributeStatus::GroupFinal)
    }

    // ---- rankings & Likert ----

    pub fn put_ranking(&mut self, r: RankingRecord) -> Result<()> {
        self.require_participant(&r.participant_id)?;
        if r.segment != 1 && r.segment != 5 {
            return Err(Error::WrongSegment {
                submitted: r.segment,
                current: self.session.discussion_segment,
            });
        }
        if r.ordered_attribute_ids.is_empty() || r.ordered_attribute_ids.len() > MAX_BALLOT_LEN {
            return Err(Error::BallotLength(r.ordered_attribute_ids.len()));
        }
        let mut seen = HashSet::new();
        for id in &r.ordered_attribute_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateAttribute(id.to_string()));
            }
            if self.attribute(id).is_err() {
                return Err(Error::UnknownAttribute(id.to_string()));
            }
        }
        if let Some(pos) = self
            .rankings
            .iter()
            .position(|x| x.participant_id == r.participant_id && x.segment == r.segment)
        {
            let old = self.rankings.remove(pos);
            self.superseded_rankings.push(old);
        }
        let pos = self.rankings.partition_point(|x| {
            (x.segment, &x.participant_id) < (r.segment, &r.participant_id)
        });
        self.rankings.insert(pos, r);
        Ok(())
    }

    pub fn rankings_for(&self, segment: u8) -> impl Iterator<Item = &RankingRecord> {
        self.rankings.iter().filter(move |r| r.segment == segment)
    }

    pub fn put_likert(&mut self, l: LikertRating) -> Result<()> {
        self.require_participant(&l.participant_id)?;
        if !(1..=5).contains(&l.score) {
            return Err(Error::Validation(format!(
                "Likert score must be 1..=5, got {}",
                l.score
            )));
        }
        if self.attribute(&l.attribute_id).is_err() {
            return Err(Error::UnknownAttribute(l.attribute_id.to_string()));
        }
        if let Some(pos) = self
            .likert
            .iter()
            .position(|x| x.participant_id == l.participant_id && x.attribute_id == l.attribute_id)
        {
            let old = self.likert.remove(pos);
            self.superseded_likert.push(old);
        }
        let pos = self.likert.partition_point(|x| {
            (&x.attribute_id, &x.participant_id) < (&l.attribute_id, &l.participant_id)
        });
        self.likert.insert(pos, l);
        Ok(())
    }

    /// Every stored id reference resolves, and session-level invariants hold.
    pub fn check_integrity(&self) -> Result<()> {
        let dangling = |what: String| Err(Error::ReferentialIntegrity(what));

        let participants: HashSet<&ParticipantId> =
            self.participants.iter().map(|p| &p.id).collect();
        let interactions: HashMap<&InteractionId, &Interaction> =
            self.interactions.iter().map(|i| (&i.id, i)).collect();
        let annotations: HashMap<&AnnotationId, &Annotation> =
            self.annotations.iter().map(|a| (&a.id, a)).collect();
        let groups: HashSet<&GroupId> = self.groups.iter().map(|g| &g.id).collect();
        let attributes: HashSet<&AttributeId> = self.attributes.iter().map(|a| &a.id).collect();

        let roster: HashSet<&ParticipantId> = self.session.participants.iter().collect();
        if roster != participants || roster.len() != self.session.participants.len() {
            return dangling("session roster does not match stored participants".into());
        }
        for id in &self.session.baseline_interaction_ids {
            if !interactions.contains_key(id) {
                return dangling(format!("baseline interaction {id}"));
            }
        }
        match (self.session.stage, self.session.discussion_segment) {
            (Stage::Discuss, Some(s)) if (1..=5).contains(&s) => {}
            (Stage::Discuss, _) => {
                return Err(Error::InvariantViolation(
                    "Discuss requires a segment in 1..=5".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(Error::InvariantViolation(
                    "discussion_segment is only set during Discuss".into(),
                ))
            }
            (_, None) => {}
        }
        for i in &self.interactions {
            if let Author::Participant(p) = &i.author {
                if !participants.contains(p) {
                    return dangling(format!("author {p} of interaction {}", i.id));
                }
            }
        }
        for a in &self.annotations {
            if !participants.contains(&a.participant_id) {
                return dangling(format!("participant of annotation {}", a.id));
            }
            let Some(i) = interactions.get(&a.interaction_id) else {
                return dangling(format!("interaction of annotation {}", a.id));
            };
            if a.turn_index >= i.turns.len() {
                return dangling(format!("turn of annotation {}", a.id));
            }
            if let Some(g) = &a.group_id {
                if !groups.contains(g) {
                    return dangling(format!("group of annotation {}", a.id));
                }
            }
        }
        let mut grouped: HashSet<(&ParticipantId, &AnnotationId)> = HashSet::new();
        for g in &self.groups {
            for m in &g.member_annotation_ids {
                if !annotations.contains_key(m) {
                    return dangling(format!("member {m} of group {}", g.id));
                }
                if !grouped.insert((&g.participant_id, m)) {
                    return Err(Error::DoubleGrouping(m.to_string()));
                }
            }
            match annotations.get(&g.derived_annotation_id) {
                Some(d) if d.group_id.as_ref() == Some(&g.id) => {}
                _ => return dangling(format!("derived annotation of group {}", g.id)),
            }
        }
        for a in &self.attributes {
            for p in &a.proposer_ids {
                if !participants.contains(p) {
                    return dangling(format!("proposer {p} of attribute {}", a.id));
                }
            }
            for ex in &a.example_refs {
                if !interactions.contains_key(&ex.interaction_id) {
                    return dangling(format!("example of attribute {}", a.id));
                }
            }
        }
        for r in self.rankings.iter().chain(&self.superseded_rankings) {
            if !participants.contains(&r.participant_id) {
                return dangling(format!("ranking participant {}", r.participant_id));
            }
            for id in &r.ordered_attribute_ids {
                if !attributes.contains(id) {
                    return dangling(format!("ranked attribute {id}"));
                }
            }
        }
        for l in self.likert.iter().chain(&self.superseded_likert) {
            if !participants.contains(&l.participant_id) || !attributes.contains(&l.attribute_id)
            {
                return dangling(format!(
                    "Likert rating ({}, {})",
                    l.participant_id, l.attribute_id
                ));
            }
        }
        for t in &self.stage_transitions {
            if !participants.contains(&t.actor) {
                return dangling(format!("transition actor {}", t.actor));
            }
        }
        for t in &self.segment_transitions {
            if !participants.contains(&t.actor) {
                return dangling(format!("segment transition actor {}", t.actor));
            }
        }
        Ok(())
    }

    /// The model turn an annotation may target.
    pub fn model_turn(&self, interaction: &InteractionId, turn_index: usize) -> Result<&str> {
        let i = self.interaction(interaction)?;
        let turn = i.turns.get(turn_index).ok_or_else(|| {
            Error::SpanOutOfBounds(format!(
                "turn {turn_index} of an interaction with {} turns",
                i.turns.len()
            ))
        })?;
        if turn.speaker != Speaker::Model {
            return Err(Error::NotModelTurn);
        }
        Ok(&turn.text)
    }
}
