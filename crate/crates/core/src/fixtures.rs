//! Bundled fixture data for tests, examples and demo sessions.

use serde::Deserialize;

/// Default system prompt for a history-education deployment.
pub const SYSTEM_PROMPT: &str = include_str!("../fixtures/system_prompt.txt");

/// One baseline interaction: a question about Thanksgiving and the recorded
/// model reply.
pub const BASELINE_THANKSGIVING: &str = include_str!("../fixtures/baseline_thanksgiving.txt");

/// Recorded exchanges for the `replay_log` provider, one interaction per
/// participant.
pub const REPLAY_LOG: &str = include_str!("../fixtures/replay_log.txt");

const MIT_INITIAL_LABELS: &str = include_str!("../fixtures/mit_initial_labels.txt");
const MIT_AXES: &str = include_str!("../fixtures/mit_axes.json");

/// Ten initial-coding labels from one pilot group, in published order.
pub fn mit_initial_labels() -> Vec<&'static str> {
    MIT_INITIAL_LABELS.lines().filter(|l| !l.is_empty()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct AxisFixture {
    pub name: String,
    pub definition: String,
}

/// Derived axes from the same group, with definitions verbatim.
pub fn mit_axes() -> Vec<AxisFixture> {
    serde_json::from_str(MIT_AXES).expect("bundled axes fixture is valid")
}
