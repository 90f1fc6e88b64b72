//! Discussion analytics: ballots, Likert ratings, Borda aggregation,
//! Segment-1-to-5 rank correlation, and the final axes report.

pub mod rank;
mod report;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AttributeId, ParticipantId};
use crate::model::{LikertRating, RankingRecord, Stage, FINAL_SEGMENT, MAX_BALLOT_LEN};
use crate::state::SessionState;

pub use rank::{borda_points, borda_scores, kendall_tau, rank_by_score};
pub use report::{build_report, render_markdown, AxisReport, ConsensusReport, ExampleExcerpt};

/// Ballot length bound used for the final report.
pub const REPORT_BALLOT_K: usize = MAX_BALLOT_LEN;

/// Rank-aggregation rule. Only Borda ships today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationRule {
    #[default]
    Borda,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BordaResult {
    pub segment: u8,
    pub scores: BTreeMap<AttributeId, u64>,
    pub ranked_ids: Vec<AttributeId>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusShift {
    /// `None` (serialized as `null`) marks an undefined tau: the two ballots
    /// share fewer than two attributes.
    pub per_participant_tau: BTreeMap<ParticipantId, Option<f64>>,
    pub mean_tau: Option<f64>,
    pub n_defined: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRequest {
    pub participant_id: ParticipantId,
    pub segment: u8,
    pub ordered_attribute_ids: Vec<AttributeId>,
}

/// Record a ballot for the current discussion segment (1 or 5). A second
/// submission replaces the first; the old one is kept for audit.
pub fn submit_ranking(
    state: &mut SessionState,
    now: DateTime<Utc>,
    req: RankingRequest,
) -> Result<RankingRecord> {
    state.require_stage(&[Stage::Discuss])?;
    let current = state.session.discussion_segment;
    if current != Some(req.segment) || !(req.segment == 1 || req.segment == FINAL_SEGMENT) {
        return Err(Error::WrongSegment {
            submitted: req.segment,
            current,
        });
    }
    let record = RankingRecord {
        participant_id: req.participant_id,
        segment: req.segment,
        ordered_attribute_ids: req.ordered_attribute_ids,
        submitted_at: now,
    };
    state.put_ranking(record.clone())?;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertRequest {
    pub participant_id: ParticipantId,
    pub attribute_id: AttributeId,
    pub score: u8,
}

/// Agreement with a group-final attribute's definition, 1..=5, Segment 5 only.
pub fn submit_likert(
    state: &mut SessionState,
    now: DateTime<Utc>,
    req: LikertRequest,
) -> Result<LikertRating> {
    state.require_stage(&[Stage::Discuss])?;
    if state.session.discussion_segment != Some(FINAL_SEGMENT) {
        return Err(Error::WrongSegment {
            submitted: FINAL_SEGMENT,
            current: state.session.discussion_segment,
        });
    }
    let attr = state
        .attribute(&req.attribute_id)
        .map_err(|_| Error::UnknownAttribute(req.attribute_id.to_string()))?;
    if attr.status != crate::model::AttributeStatus::GroupFinal {
        return Err(Error::Validation(format!(
            "attribute `{}` is not group-final",
            attr.name
        )));
    }
    let rating = LikertRating {
        participant_id: req.participant_id,
        attribute_id: req.attribute_id,
        score: req.score,
        submitted_at: now,
    };
    state.put_likert(rating.clone())?;
    Ok(rating)
}

/// Borda count over one segment's ballots. Group-final attributes that no
/// ballot lists still appear, with score 0.
pub fn borda(state: &SessionState, segment: u8, k: usize) -> Result<BordaResult> {
    let ballots: Vec<Vec<AttributeId>> = state
        .rankings_for(segment)
        .map(|r| r.ordered_attribute_ids.clone())
        .collect();
    if ballots.is_empty() {
        return Err(Error::NoBallots(segment));
    }
    Ok(borda_over(state, segment, &ballots, k))
}

fn borda_over(
    state: &SessionState,
    segment: u8,
    ballots: &[Vec<AttributeId>],
    k: usize,
) -> BordaResult {
    let mut scores = borda_scores(ballots, k);
    for a in state.group_final_attributes() {
        scores.entry(a.id.clone()).or_insert(0);
    }
    let name_of = |id: &AttributeId| {
        state
            .attribute(id)
            .map(|a| a.name.clone())
            .unwrap_or_default()
    };
    let ranked_ids = rank_by_score(&scores, name_of);
    BordaResult {
        segment,
        scores,
        ranked_ids,
        k,
    }
}

/// Per-participant tau between the Segment 1 and Segment 5 ballots.
pub fn consensus_shift(state: &SessionState) -> Result<ConsensusShift> {
    let reached_final = match state.stage() {
        Stage::Complete => true,
        Stage::Discuss => state.session.discussion_segment == Some(FINAL_SEGMENT),
        _ => false,
    };
    if !reached_final {
        state.require_stage(&[Stage::Complete])?;
    }
    shift_of(state).ok_or(Error::NoSegmentFiveData)
}

fn shift_of(state: &SessionState) -> Option<ConsensusShift> {
    let first: BTreeMap<&ParticipantId, &RankingRecord> = state
        .rankings_for(1)
        .map(|r| (&r.participant_id, r))
        .collect();
    let mut per_participant_tau = BTreeMap::new();
    for last in state.rankings_for(FINAL_SEGMENT) {
        let tau = first.get(&last.participant_id).and_then(|f| {
            kendall_tau(&f.ordered_attribute_ids, &last.ordered_attribute_ids).ok()
        });
        per_participant_tau.insert(last.participant_id.clone(), tau);
    }
    if per_participant_tau.is_empty() {
        return None;
    }
    let defined: Vec<f64> = per_participant_tau.values().flatten().copied().collect();
    let mean_tau = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Some(ConsensusShift {
        n_defined: defined.len(),
        per_participant_tau,
        mean_tau,
    })
}
