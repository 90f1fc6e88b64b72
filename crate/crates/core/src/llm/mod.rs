//! Chat gateway for the Interact stage.
//!
//! Every exchange is persisted in two commits: the user turn lands first
//! with `pending_reply` set, and the model turn follows once the provider
//! answers. A crash or provider failure in between leaves a pending
//! interaction that [`Gateway::retry_reply`] can complete, never a model
//! turn without its user turn.

pub mod provider;
pub mod transcript;

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{IdKind, InteractionId, ParticipantId, SessionId};
use crate::model::{Author, Interaction, Speaker, Stage, Turn};
use crate::state::SessionState;
use crate::store::Store;

pub use provider::{
    build_provider, ChatMessage, ChatProvider, ChatRole, LlmProviderConfig, MockEcho,
    ProviderError, ProviderKind, ProviderRequest, RemoteApi, ReplayLog,
};
pub use transcript::{parse_transcripts, render_transcripts, ParsedTurn};

pub const TRUNCATION_MARKER: &str = "\n[reply truncated]";

/// Cut `text` to `max_chars` scalar values, appending [`TRUNCATION_MARKER`].
pub fn truncate_reply(text: &str, max_chars: usize) -> (String, bool) {
    match text.char_indices().nth(max_chars) {
        Some((cut, _)) => (format!("{}{TRUNCATION_MARKER}", &text[..cut]), true),
        None => (text.to_owned(), false),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    /// Doubles after each failed attempt.
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub fn immediate(attempts: u32) -> Self {
        Self {
            attempts,
            initial_backoff: Duration::ZERO,
        }
    }
}

#[derive(Clone)]
pub struct ProviderEntry {
    pub config: LlmProviderConfig,
    pub provider: Arc<dyn ChatProvider>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub participant_id: ParticipantId,
    /// Absent to start a new interaction.
    #[serde(default)]
    pub interaction_id: Option<InteractionId>,
    pub user_text: String,
    #[serde(default)]
    pub topic_tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatReply {
    pub interaction_id: InteractionId,
    pub turn: Turn,
    pub truncated: bool,
}

struct InFlight<'a> {
    set: &'a Mutex<HashSet<InteractionId>>,
    id: InteractionId,
}

impl<'a> InFlight<'a> {
    fn claim(set: &'a Mutex<HashSet<InteractionId>>, id: &InteractionId) -> Result<Self> {
        if !set.lock().unwrap().insert(id.clone()) {
            return Err(Error::Busy(id.to_string()));
        }
        Ok(Self {
            set,
            id: id.clone(),
        })
    }
}

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.set.lock().unwrap().remove(&self.id);
    }
}

pub struct Gateway {
    store: Arc<Store>,
    providers: HashMap<String, ProviderEntry>,
    retry: RetryPolicy,
    in_flight: Mutex<HashSet<InteractionId>>,
}

fn check_author(
    state: &SessionState,
    participant: &ParticipantId,
    interaction: &InteractionId,
) -> Result<()> {
    let i = state.interaction(interaction)?;
    if !i.is_authored_by(participant) {
        return Err(Error::InvariantViolation(format!(
            "interaction {interaction} was not started by {participant}"
        )));
    }
    Ok(())
}

impl Gateway {
    pub fn new(store: Arc<Store>, retry: RetryPolicy) -> Self {
        Self {
            store,
            providers: HashMap::new(),
            retry,
            in_flight: Mutex::new(HashSet::new()),
        }
    }

    pub fn register(&mut self, name: impl Into<String>, config: LlmProviderConfig, provider: Arc<dyn ChatProvider>) {
        self.providers
            .insert(name.into(), ProviderEntry { config, provider });
    }

    fn provider_for(&self, session: &SessionId) -> Result<(String, ProviderEntry)> {
        let state = self.store.snapshot(session)?;
        let ctx = self.store.context(&state.session.context_id)?;
        let entry = self.providers.get(&ctx.llm_config).cloned().ok_or_else(|| {
            Error::Config(format!("no LLM provider named `{}`", ctx.llm_config))
        })?;
        Ok((ctx.system_prompt, entry))
    }

    /// Send one user message and persist the model's reply.
    pub async fn send_message(&self, session: &SessionId, req: ChatRequest) -> Result<ChatReply> {
        let text = req.user_text.trim();
        if text.is_empty() {
            return Err(Error::Validation("user_text is empty".into()));
        }
        let snapshot = self.store.snapshot(session)?;
        snapshot.require_stage(&[Stage::Interact])?;
        snapshot.require_participant(&req.participant_id)?;
        if let Some(id) = &req.interaction_id {
            check_author(&snapshot, &req.participant_id, id)?;
        }
        let (system_prompt, entry) = self.provider_for(session)?;

        // Claim the interaction before the pending check so a concurrent
        // exchange on it is reported as Busy.
        let _guard = match &req.interaction_id {
            Some(id) => Some(InFlight::claim(&self.in_flight, id)?),
            None => None,
        };

        let user_text = req.user_text.clone();
        let interaction_id = self.store.update(session, |st, now| {
            st.require_stage(&[Stage::Interact])?;
            st.require_participant(&req.participant_id)?;
            let turn = Turn {
                speaker: Speaker::User,
                text: user_text,
                at: now,
            };
            match &req.interaction_id {
                Some(id) => {
                    check_author(st, &req.participant_id, id)?;
                    let mut i = st.interaction(id)?.clone();
                    if i.pending_reply {
                        return Err(Error::PendingReply(id.to_string()));
                    }
                    i.turns.push(turn);
                    i.pending_reply = true;
                    for tag in &req.topic_tags {
                        if !i.topic_tags.contains(tag) {
                            i.topic_tags.push(tag.clone());
                        }
                    }
                    st.put_interaction(i)?;
                    Ok(id.clone())
                }
                None => {
                    let id = InteractionId(st.mint(IdKind::Interaction));
                    let mut tags = req.topic_tags.clone();
                    tags.dedup();
                    st.put_interaction(Interaction {
                        id: id.clone(),
                        session_id: st.session.id.clone(),
                        author: Author::Participant(req.participant_id.clone()),
                        turns: vec![turn],
                        topic_tags: tags,
                        pending_reply: true,
                        created_at: now,
                    })?;
                    Ok(id)
                }
            }
        })?;
        let _guard = match _guard {
            Some(g) => g,
            None => InFlight::claim(&self.in_flight, &interaction_id)?,
        };
        self.complete_pending(session, &interaction_id, &system_prompt, &entry)
            .await
    }

    /// Ask the provider again for an interaction whose reply is pending.
    pub async fn retry_reply(
        &self,
        session: &SessionId,
        participant: &ParticipantId,
        interaction: &InteractionId,
    ) -> Result<ChatReply> {
        let snapshot = self.store.snapshot(session)?;
        snapshot.require_stage(&[Stage::Interact])?;
        snapshot.require_participant(participant)?;
        check_author(&snapshot, participant, interaction)?;
        let _guard = InFlight::claim(&self.in_flight, interaction)?;
        let current = self.store.snapshot(session)?;
        if !current.interaction(interaction)?.pending_reply {
            return Err(Error::NoPendingReply(interaction.to_string()));
        }
        let (system_prompt, entry) = self.provider_for(session)?;
        self.complete_pending(session, interaction, &system_prompt, &entry)
            .await
    }

    async fn complete_pending(
        &self,
        session: &SessionId,
        interaction: &InteractionId,
        system_prompt: &str,
        entry: &ProviderEntry,
    ) -> Result<ChatReply> {
        let state = self.store.snapshot(session)?;
        let history = &state.interaction(interaction)?.turns;
        let mut messages = Vec::with_capacity(history.len() + 1);
        messages.push(ChatMessage {
            role: ChatRole::System,
            content: system_prompt.to_owned(),
        });
        messages.extend(history.iter().map(|t| ChatMessage::from_turn(t.speaker, &t.text)));
        let request = ProviderRequest {
            model: entry.config.model_name.clone(),
            messages,
        };

        let raw = self.call_with_retry(entry, &request).await?;
        let (text, truncated) = truncate_reply(&raw, entry.config.max_reply_chars);

        let turn = self.store.update(session, |st, now| {
            let mut i = st.interaction(interaction)?.clone();
            if !i.pending_reply {
                return Err(Error::NoPendingReply(interaction.to_string()));
            }
            let turn = Turn {
                speaker: Speaker::Model,
                text,
                at: now,
            };
            i.turns.push(turn.clone());
            i.pending_reply = false;
            st.put_interaction(i)?;
            Ok(turn)
        })?;
        Ok(ChatReply {
            interaction_id: interaction.clone(),
            turn,
            truncated,
        })
    }

    async fn call_with_retry(&self, entry: &ProviderEntry, request: &ProviderRequest) -> Result<String> {
        let timeout = entry.config.timeout();
        let mut backoff = self.retry.initial_backoff;
        let mut last = ProviderError::Unavailable("no attempt made".into());
        for attempt in 0..self.retry.attempts.max(1) {
            if attempt > 0 && !backoff.is_zero() {
                tokio::time::sleep(backoff).await;
                backoff *= 2;
            }
            let outcome = match tokio::time::timeout(timeout, entry.provider.complete(request)).await {
                Ok(r) => r,
                Err(_) => Err(ProviderError::Timeout),
            };
            match outcome {
                Ok(text) => return Ok(text),
                Err(ProviderError::Rejected(msg)) => return Err(Error::ProviderUnavailable(msg)),
                Err(e) => {
                    tracing::warn!(attempt, error = ?e, "provider call failed");
                    last = e;
                }
            }
        }
        Err(match last {
            ProviderError::Timeout => Error::ProviderTimeout,
            ProviderError::Unavailable(msg) | ProviderError::Rejected(msg) => {
                Error::ProviderUnavailable(msg)
            }
        })
    }

    /// Store shared baseline transcripts. Parsing is all-or-nothing; an empty
    /// list leaves the session untouched.
    pub fn load_baseline(
        &self,
        session: &SessionId,
        transcripts: &[String],
        author: Option<ParticipantId>,
    ) -> Result<Vec<InteractionId>> {
        self.store
            .snapshot(session)?
            .require_stage(&[Stage::Setup, Stage::Familiarize])?;
        let mut parsed = Vec::new();
        for doc in transcripts {
            parsed.extend(parse_transcripts(doc)?);
        }
        if parsed.is_empty() {
            return Ok(Vec::new());
        }
        self.store.update(session, |st, now| {
            st.require_stage(&[Stage::Setup, Stage::Familiarize])?;
            let author = match &author {
                Some(p) => {
                    st.require_participant(p)?;
                    Author::Participant(p.clone())
                }
                None => Author::Baseline,
            };
            let mut ids = Vec::with_capacity(parsed.len());
            for turns in parsed {
                let id = InteractionId(st.mint(IdKind::Interaction));
                st.put_interaction(Interaction {
                    id: id.clone(),
                    session_id: st.session.id.clone(),
                    author: author.clone(),
                    turns: turns
                        .into_iter()
                        .map(|t| Turn {
                            speaker: t.speaker,
                            text: t.text,
                            at: now,
                        })
                        .collect(),
                    topic_tags: Vec::new(),
                    pending_reply: false,
                    created_at: now,
                })?;
                st.session.baseline_interaction_ids.push(id.clone());
                ids.push(id);
            }
            Ok(ids)
        })
    }
}
