use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::transcript::parse_transcripts;
use crate::error::{Error, Result};
use crate::model::Speaker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    RemoteApi,
    MockEcho,
    ReplayLog,
}

pub const DEFAULT_MAX_REPLY_CHARS: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmProviderConfig {
    pub provider_kind: ProviderKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model_name: String,
    #[serde(default = "default_max_reply_chars")]
    pub max_reply_chars: usize,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub credentials_env_var: Option<String>,
    /// Transcript file backing the `replay_log` provider.
    #[serde(default)]
    pub replay_path: Option<PathBuf>,
}

fn default_max_reply_chars() -> usize {
    DEFAULT_MAX_REPLY_CHARS
}

fn default_timeout_secs() -> u64 {
    60
}

impl LlmProviderConfig {
    pub fn mock_echo() -> Self {
        Self {
            provider_kind: ProviderKind::MockEcho,
            endpoint: None,
            model_name: "mock-echo".into(),
            max_reply_chars: DEFAULT_MAX_REPLY_CHARS,
            timeout_secs: default_timeout_secs(),
            credentials_env_var: None,
            replay_path: None,
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_reply_chars == 0 {
            return Err(Error::Config("max_reply_chars must be positive".into()));
        }
        match self.provider_kind {
            ProviderKind::RemoteApi => {
                if self.endpoint.as_deref().is_none_or(str::is_empty) {
                    return Err(Error::Config("remote_api provider needs an endpoint".into()));
                }
                if self.credentials_env_var.as_deref().is_none_or(str::is_empty) {
                    return Err(Error::Config(
                        "remote_api provider needs credentials_env_var".into(),
                    ));
                }
            }
            ProviderKind::ReplayLog if self.replay_path.is_none() => {
                return Err(Error::Config("replay_log provider needs replay_path".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn from_turn(speaker: Speaker, text: &str) -> Self {
        Self {
            role: match speaker {
                Speaker::User => ChatRole::User,
                Speaker::Model => ChatRole::Assistant,
            },
            content: text.to_owned(),
        }
    }
}

/// What a provider receives: the system prompt first, then the full
/// interaction history ending with the new user message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
}

impl ProviderRequest {
    pub fn last_user_text(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == ChatRole::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderError {
    /// Transient; worth retrying.
    Unavailable(String),
    Timeout,
    /// Permanent for this request.
    Rejected(String),
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    fn kind(&self) -> ProviderKind;
    async fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError>;
}

/// Replies `ECHO: <user text>` and keeps every request it saw.
#[derive(Debug, Default)]
pub struct MockEcho {
    requests: Mutex<Vec<ProviderRequest>>,
}

impl MockEcho {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn requests(&self) -> Vec<ProviderRequest> {
        self.requests.lock().unwrap().clone()
    }
}

#[async_trait]
impl ChatProvider for MockEcho {
    fn kind(&self) -> ProviderKind {
        ProviderKind::MockEcho
    }

    async fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError> {
        self.requests.lock().unwrap().push(request.clone());
        Ok(format!("ECHO: {}", request.last_user_text()))
    }
}

/// Replays recorded model replies keyed by the exact user text.
#[derive(Debug, Default)]
pub struct ReplayLog {
    replies: HashMap<String, String>,
}

impl ReplayLog {
    /// Build from transcript documents; the first reply recorded for a
    /// given user text wins.
    pub fn from_transcripts(docs: &[&str]) -> Result<Self> {
        let mut replies = HashMap::new();
        for doc in docs {
            for turns in parse_transcripts(doc)? {
                for pair in turns.chunks(2) {
                    if let [user, model] = pair {
                        replies
                            .entry(user.text.clone())
                            .or_insert_with(|| model.text.clone());
                    }
                }
            }
        }
        Ok(Self { replies })
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }
}

#[async_trait]
impl ChatProvider for ReplayLog {
    fn kind(&self) -> ProviderKind {
        ProviderKind::ReplayLog
    }

    async fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError> {
        let text = request.last_user_text();
        self.replies
            .get(text)
            .cloned()
            .ok_or_else(|| ProviderError::Rejected(format!("no recorded reply for {text:?}")))
    }
}

/// OpenAI-compatible `POST {endpoint}/chat/completions` client.
#[derive(Debug, Clone)]
pub struct RemoteApi {
    client: reqwest::Client,
    endpoint: String,
    credentials_env_var: String,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    message: ChatMessage,
}

impl RemoteApi {
    pub fn new(cfg: &LlmProviderConfig) -> Result<Self> {
        cfg.validate()?;
        let client = reqwest::Client::builder()
            .timeout(cfg.timeout())
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: cfg
                .endpoint
                .clone()
                .unwrap_or_default()
                .trim_end_matches('/')
                .to_owned(),
            credentials_env_var: cfg.credentials_env_var.clone().unwrap_or_default(),
        })
    }
}

#[async_trait]
impl ChatProvider for RemoteApi {
    fn kind(&self) -> ProviderKind {
        ProviderKind::RemoteApi
    }

    async fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError> {
        let key = std::env::var(&self.credentials_env_var).map_err(|_| {
            ProviderError::Rejected(format!("{} is not set", self.credentials_env_var))
        })?;
        let resp = self
            .client
            .post(format!("{}/chat/completions", self.endpoint))
            .bearer_auth(key)
            .json(&serde_json::json!({
                "model": request.model,
                "messages": request.messages,
            }))
            .send()
            .await
            .map_err(|e| {
                if e.is_timeout() {
                    ProviderError::Timeout
                } else {
                    ProviderError::Unavailable(e.to_string())
                }
            })?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(ProviderError::Unavailable(format!("provider answered {status}")));
        }
        if !status.is_success() {
            return Err(ProviderError::Rejected(format!("provider answered {status}")));
        }
        let body: CompletionResponse = resp.json().await.map_err(|e| {
            if e.is_timeout() {
                ProviderError::Timeout
            } else {
                ProviderError::Unavailable(e.to_string())
            }
        })?;
        body.choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| ProviderError::Unavailable("response has no choices".into()))
    }
}

/// Construct the provider a config block describes.
pub fn build_provider(cfg: &LlmProviderConfig) -> Result<Arc<dyn ChatProvider>> {
    cfg.validate()?;
    Ok(match cfg.provider_kind {
        ProviderKind::MockEcho => Arc::new(MockEcho::new()),
        ProviderKind::RemoteApi => Arc::new(RemoteApi::new(cfg)?),
        ProviderKind::ReplayLog => {
            let path = cfg.replay_path.as_ref().expect("validated");
            let doc = std::fs::read_to_string(path)?;
            Arc::new(ReplayLog::from_transcripts(&[&doc])?)
        }
    })
}
