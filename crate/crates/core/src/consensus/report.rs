use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{borda_over, shift_of, ConsensusShift, REPORT_BALLOT_K};
use crate::error::{Error, Result};
use crate::ids::{AttributeId, InteractionId, SessionId};
use crate::model::{CharRange, Speaker, Stage, FINAL_SEGMENT};
use crate::state::SessionState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleExcerpt {
    pub interaction_id: InteractionId,
    pub turn_index: usize,
    pub char_range: Option<CharRange>,
    pub speaker: Speaker,
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReport {
    pub attribute_id: AttributeId,
    pub name: String,
    pub definition: String,
    pub borda_score: u64,
    /// Absent when nobody rated the axis.
    pub likert_mean: Option<f64>,
    /// Counts of scores 1 through 5.
    pub likert_histogram: [u32; 5],
    pub examples: Vec<ExampleExcerpt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub session_id: SessionId,
    pub final_axes: Vec<AxisReport>,
    /// Absent when no Segment 5 ballots exist (report forced early).
    pub shift: Option<ConsensusShift>,
    pub generated_at: DateTime<Utc>,
}

/// Assemble the final axes, ordered by Segment 5 Borda score.
///
/// Requires stage Complete unless `forced`; every group-final attribute
/// must carry a definition either way.
pub fn build_report(
    state: &SessionState,
    generated_at: DateTime<Utc>,
    forced: bool,
) -> Result<ConsensusReport> {
    if !forced {
        state.require_stage(&[Stage::Complete])?;
    }
    let missing: Vec<String> = state
        .group_final_attributes()
        .filter(|a| a.definition.trim().is_empty())
        .map(|a| a.name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingDefinitions(missing));
    }

    let ballots: Vec<Vec<AttributeId>> = state
        .rankings_for(FINAL_SEGMENT)
        .map(|r| r.ordered_attribute_ids.clone())
        .collect();
    let borda = borda_over(state, FINAL_SEGMENT, &ballots, REPORT_BALLOT_K);

    let mut final_axes = Vec::new();
    for id in &borda.ranked_ids {
        let attr = state.attribute(id)?;
        if attr.status != crate::model::AttributeStatus::GroupFinal {
            continue;
        }
        let mut histogram = [0u32; 5];
        for l in state.likert.iter().filter(|l| &l.attribute_id == id) {
            histogram[(l.score - 1) as usize] += 1;
        }
        let raters: u32 = histogram.iter().sum();
        let likert_mean = (raters > 0).then(|| {
            let total: u32 = histogram
                .iter()
                .enumerate()
                .map(|(i, n)| (i as u32 + 1) * n)
                .sum();
            f64::from(total) / f64::from(raters)
        });
        let examples = attr
            .example_refs
            .iter()
            .map(|ex| {
                let interaction = state.interaction(&ex.interaction_id)?;
                let turn = interaction.turns.get(ex.turn_index).ok_or_else(|| {
                    Error::SpanOutOfBounds(format!("example turn {}", ex.turn_index))
                })?;
                let excerpt = match &ex.char_range {
                    Some(r) => r.slice(&turn.text).to_owned(),
                    None => turn.text.clone(),
                };
                Ok(ExampleExcerpt {
                    interaction_id: ex.interaction_id.clone(),
                    turn_index: ex.turn_index,
                    char_range: ex.char_range,
                    speaker: turn.speaker,
                    excerpt,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        final_axes.push(AxisReport {
            attribute_id: id.clone(),
            name: attr.name.clone(),
            definition: attr.definition.clone(),
            borda_score: borda.scores[id],
            likert_mean,
            likert_histogram: histogram,
            examples,
        });
    }

    Ok(ConsensusReport {
        session_id: state.session.id.clone(),
        final_axes,
        shift: shift_of(state),
        generated_at,
    })
}

fn cell(text: &str) -> String {
    text.replace('|', "\\|").replace(['\r', '\n'], " ")
}

/// Markdown rendering: an (axis, definition) table, then one block per
/// axis with its sample interactions.
pub fn render_markdown(report: &ConsensusReport, title: &str) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Derived axes: {}", cell(title));
    let _ = writeln!(md);
    let _ = writeln!(
        md,
        "Session `{}`, generated {}.",
        report.session_id,
        report
            .generated_at
            .to_rfc3339_opts(SecondsFormat::Millis, true)
    );
    let _ = writeln!(md);
    let _ = writeln!(md, "| Axis | Definition |");
    let _ = writeln!(md, "| --- | --- |");
    for axis in &report.final_axes {
        let _ = writeln!(md, "| {} | {} |", cell(&axis.name), cell(&axis.definition));
    }
    for axis in &report.final_axes {
        let _ = writeln!(md);
        let _ = writeln!(md, "## Label: {}", axis.name);
        let _ = writeln!(md);
        let _ = writeln!(md, "Label Definition: {}", axis.definition);
        let _ = writeln!(md);
        let mean = axis
            .likert_mean
            .map(|m| format!("{m:.2}"))
            .unwrap_or_else(|| "n/a".into());
        let hist: Vec<String> = axis.likert_histogram.iter().map(u32::to_string).collect();
        let _ = writeln!(
            md,
            "Borda score: {}. Likert mean: {} (1-5 counts: {}).",
            axis.borda_score,
            mean,
            hist.join("/")
        );
        for (i, ex) in axis.examples.iter().enumerate() {
            let _ = writeln!(md);
            let _ = writeln!(md, "*Sample Interaction {}*", i + 1);
            let _ = writeln!(md);
            for line in ex.excerpt.lines() {
                let _ = writeln!(md, "> {line}");
            }
        }
    }
    if let Some(shift) = &report.shift {
        let _ = writeln!(md);
        let _ = writeln!(md, "## Consensus shift (Segment 1 vs 5)");
        let _ = writeln!(md);
        match shift.mean_tau {
            Some(m) => {
                let _ = writeln!(
                    md,
                    "Mean Kendall tau {m:.3} over {} participants.",
                    shift.n_defined
                );
            }
            None => {
                let _ = writeln!(md, "No participant has two comparable ballots.");
            }
        }
    }
    md
}
