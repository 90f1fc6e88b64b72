//! File-backed document store.
//!
//! Layout under the store root:
//!
//! ```text
//! manifest.json                      {"schema_version": 1, "next_seq": N}
//! contexts/<context-id>.json
//! sessions/<session-id>/HEAD         current generation number
//! sessions/<session-id>/gen-00000007/manifest.json
//!                                    session.json participants.json
//!                                    interactions.json annotations.json
//!                                    groups.json attributes.json
//!                                    rankings.json likert.json
//!                                    transitions.json audit.json
//! ```
//!
//! A commit writes a complete new generation directory and then swaps
//! `HEAD` with an atomic rename, so a crash leaves either the old or the
//! new generation visible, never a mix. Writes to one session are
//! serialized; readers get an `Arc` snapshot and never block writers.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::ids::{self, ContextId, SessionId};
use crate::model::{
    Annotation, Attribute, DeploymentContext, FocusedGroup, Interaction, LikertRating, NewContext,
    Participant, RankingRecord, SegmentTransition, Session, Stage, StageTransition,
};
use crate::state::{SessionState, SCHEMA_VERSION};

#[derive(Debug, Serialize, Deserialize)]
struct RootManifest {
    schema_version: u32,
    next_seq: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GenerationManifest {
    schema_version: u32,
    generation: u64,
}

#[derive(Serialize, Deserialize)]
struct SessionHeader {
    session: Session,
    next_seq: u64,
    annotation_rev: u64,
}

#[derive(Serialize, Deserialize)]
struct Transitions {
    stage: Vec<StageTransition>,
    segment: Vec<SegmentTransition>,
}

#[derive(Serialize, Deserialize)]
struct Audit {
    superseded_rankings: Vec<RankingRecord>,
    superseded_likert: Vec<LikertRating>,
}

struct Slot {
    generation: Mutex<u64>,
    current: RwLock<Arc<SessionState>>,
}

pub struct Store {
    root: PathBuf,
    clock: Arc<dyn Clock>,
    root_seq: Mutex<u64>,
    contexts: RwLock<BTreeMap<ContextId, DeploymentContext>>,
    sessions: RwLock<HashMap<SessionId, Arc<Slot>>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("root", &self.root).finish()
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    let mut f = File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Write to a sibling temp file, fsync, then rename over `path`.
fn replace_atomically(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

fn gen_dir(session_dir: &Path, generation: u64) -> PathBuf {
    session_dir.join(format!("gen-{generation:08}"))
}

impl Store {
    pub fn open(root: impl Into<PathBuf>, clock: Arc<dyn Clock>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("contexts"))?;
        fs::create_dir_all(root.join("sessions"))?;

        let manifest_path = root.join("manifest.json");
        let next_seq = if manifest_path.exists() {
            let m: RootManifest = read_json(&manifest_path)?;
            if m.schema_version != SCHEMA_VERSION {
                return Err(Error::Config(format!(
                    "store schema version {} is not supported (expected {SCHEMA_VERSION})",
                    m.schema_version
                )));
            }
            m.next_seq
        } else {
            let m = RootManifest {
                schema_version: SCHEMA_VERSION,
                next_seq: 0,
            };
            replace_atomically(&manifest_path, &serde_json::to_vec_pretty(&m)?)?;
            0
        };

        let mut contexts = BTreeMap::new();
        for entry in fs::read_dir(root.join("contexts"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let ctx: DeploymentContext = read_json(&path)?;
                contexts.insert(ctx.id.clone(), ctx);
            }
        }

        let mut sessions = HashMap::new();
        for entry in fs::read_dir(root.join("sessions"))? {
            let dir = entry?.path();
            if !dir.is_dir() {
                continue;
            }
            let Ok(head) = fs::read_to_string(dir.join("HEAD")) else {
                // A session whose first commit never completed.
                fs::remove_dir_all(&dir)?;
                continue;
            };
            let generation: u64 = head
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("corrupt HEAD in {}", dir.display())))?;
            let state = load_generation(&gen_dir(&dir, generation))?;
            prune_generations(&dir, generation)?;
            sessions.insert(
                state.session.id.clone(),
                Arc::new(Slot {
                    generation: Mutex::new(generation),
                    current: RwLock::new(Arc::new(state)),
                }),
            );
        }

        Ok(Self {
            root,
            clock,
            root_seq: Mutex::new(next_seq),
            contexts: RwLock::new(contexts),
            sessions: RwLock::new(sessions),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    fn mint_root(&self, prefix: &str, now: DateTime<Utc>) -> Result<String> {
        let mut seq = self.root_seq.lock().unwrap();
        *seq += 1;
        let m = RootManifest {
            schema_version: SCHEMA_VERSION,
            next_seq: *seq,
        };
        replace_atomically(
            &self.root.join("manifest.json"),
            &serde_json::to_vec_pretty(&m)?,
        )?;
        Ok(ids::root_id(prefix, now.timestamp_millis(), *seq))
    }

    // ---- contexts ----

    pub fn create_context(&self, spec: NewContext) -> Result<DeploymentContext> {
        spec.validate()?;
        let now = self.now();
        let id = ContextId(self.mint_root("ctx", now)?);
        let ctx = DeploymentContext {
            id,
            name: spec.name,
            description: spec.description,
            system_prompt: spec.system_prompt,
            familiarization_docs: spec.familiarization_docs,
            orientation_video_uri: spec.orientation_video_uri,
            llm_config: spec.llm_config,
            embedding_config: spec.embedding_config,
            created_at: now,
        };
        self.write_context(&ctx)?;
        Ok(ctx)
    }

    fn write_context(&self, ctx: &DeploymentContext) -> Result<()> {
        let path = self.root.join("contexts").join(format!("{}.json", ctx.id));
        let mut bytes = serde_json::to_vec_pretty(ctx)?;
        bytes.push(b'\n');
        replace_atomically(&path, &bytes)?;
        self.contexts
            .write()
            .unwrap()
            .insert(ctx.id.clone(), ctx.clone());
        Ok(())
    }

    pub fn context(&self, id: &ContextId) -> Result<DeploymentContext> {
        self.contexts
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found("context", id.to_string()))
    }

    pub fn list_contexts(&self) -> Vec<DeploymentContext> {
        let mut all: Vec<_> = self.contexts.read().unwrap().values().cloned().collect();
        all.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        all
    }

    // ---- sessions ----

    pub fn create_session(&self, context_id: &ContextId) -> Result<Arc<SessionState>> {
        self.context(context_id).map_err(|_| {
            Error::ReferentialIntegrity(format!("context {context_id} does not exist"))
        })?;
        let now = self.now();
        let id = SessionId(self.mint_root("ses", now)?);
        let state = SessionState::new(Session {
            id: id.clone(),
            context_id: context_id.clone(),
            stage: Stage::Setup,
            participants: Vec::new(),
            baseline_interaction_ids: Vec::new(),
            discussion_segment: None,
            created_at: now,
            updated_at: now,
        });
        self.insert_session(state)
    }

    fn insert_session(&self, state: SessionState) -> Result<Arc<SessionState>> {
        let mut sessions = self.sessions.write().unwrap();
        if sessions.contains_key(&state.session.id) {
            return Err(Error::Conflict {
                id: state.session.id.to_string(),
            });
        }
        let dir = self.session_dir(&state.session.id);
        fs::create_dir_all(&dir)?;
        persist_generation(&dir, 1, &state)?;
        let state = Arc::new(state);
        sessions.insert(
            state.session.id.clone(),
            Arc::new(Slot {
                generation: Mutex::new(1),
                current: RwLock::new(state.clone()),
            }),
        );
        Ok(state)
    }

    /// Recreate a session (and its context, if absent) from an export.
    pub fn import_session(
        &self,
        context: DeploymentContext,
        state: SessionState,
    ) -> Result<Arc<SessionState>> {
        if state.session.context_id != context.id {
            return Err(Error::ReferentialIntegrity(
                "exported session refers to a different context".into(),
            ));
        }
        state.check_integrity()?;
        match self.context(&context.id) {
            Ok(existing) if existing != context => {
                return Err(Error::Conflict {
                    id: context.id.to_string(),
                })
            }
            Ok(_) => {}
            Err(_) => self.write_context(&context)?,
        }
        self.insert_session(state)
    }

    fn session_dir(&self, id: &SessionId) -> PathBuf {
        self.root.join("sessions").join(id.as_str())
    }

    fn slot(&self, id: &SessionId) -> Result<Arc<SessionState>> {
        self.slot_handle(id)
            .map(|slot| slot.current.read().unwrap().clone())
    }

    fn slot_handle(&self, id: &SessionId) -> Result<Arc<Slot>> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found("session", id.to_string()))
    }

    /// Consistent read-only view of a session.
    pub fn snapshot(&self, id: &SessionId) -> Result<Arc<SessionState>> {
        self.slot(id)
    }

    pub fn list_sessions(&self) -> Vec<SessionId> {
        let mut ids: Vec<_> = self.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Apply `f` to a private copy of the session and commit it if `f`
    /// succeeds and the result passes the integrity check. Writers to one
    /// session are linearized.
    pub fn update<T>(
        &self,
        id: &SessionId,
        f: impl FnOnce(&mut SessionState, DateTime<Utc>) -> Result<T>,
    ) -> Result<T> {
        self.update_then(id, f, |_, _| {})
    }

    /// Like [`Store::update`], and runs `after` on the committed state while
    /// the session's write lock is still held.
    pub fn update_then<T>(
        &self,
        id: &SessionId,
        f: impl FnOnce(&mut SessionState, DateTime<Utc>) -> Result<T>,
        after: impl FnOnce(&SessionState, &T),
    ) -> Result<T> {
        let slot = self.slot_handle(id)?;
        let mut generation = slot.generation.lock().unwrap();
        let mut next = (**slot.current.read().unwrap()).clone();
        let now = self.now();
        let out = f(&mut next, now)?;
        next.session.updated_at = now;
        next.check_integrity()?;
        let dir = self.session_dir(id);
        persist_generation(&dir, *generation + 1, &next)?;
        *generation += 1;
        prune_generations(&dir, *generation)?;
        let next = Arc::new(next);
        *slot.current.write().unwrap() = next.clone();
        after(&next, &out);
        Ok(out)
    }
}

fn persist_generation(session_dir: &Path, generation: u64, state: &SessionState) -> Result<()> {
    let dir = gen_dir(session_dir, generation);
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    write_json(
        &dir.join("manifest.json"),
        &GenerationManifest {
            schema_version: SCHEMA_VERSION,
            generation,
        },
    )?;
    write_json(
        &dir.join("session.json"),
        &SessionHeader {
            session: state.session.clone(),
            next_seq: state.next_seq,
            annotation_rev: state.annotation_rev,
        },
    )?;
    write_json(&dir.join("participants.json"), &state.participants)?;
    write_json(&dir.join("interactions.json"), &state.interactions)?;
    write_json(&dir.join("annotations.json"), &state.annotations)?;
    write_json(&dir.join("groups.json"), &state.groups)?;
    write_json(&dir.join("attributes.json"), &state.attributes)?;
    write_json(&dir.join("rankings.json"), &state.rankings)?;
    write_json(&dir.join("likert.json"), &state.likert)?;
    write_json(
        &dir.join("transitions.json"),
        &Transitions {
            stage: state.stage_transitions.clone(),
            segment: state.segment_transitions.clone(),
        },
    )?;
    write_json(
        &dir.join("audit.json"),
        &Audit {
            superseded_rankings: state.superseded_rankings.clone(),
            superseded_likert: state.superseded_likert.clone(),
        },
    )?;
    if let Ok(d) = File::open(&dir) {
        let _ = d.sync_all();
    }
    replace_atomically(&session_dir.join("HEAD"), generation.to_string().as_bytes())
}

fn load_generation(dir: &Path) -> Result<SessionState> {
    let manifest: GenerationManifest = read_json(&dir.join("manifest.json"))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "session schema version {} is not supported",
            manifest.schema_version
        )));
    }
    let header: SessionHeader = read_json(&dir.join("session.json"))?;
    let transitions: Transitions = read_json(&dir.join("transitions.json"))?;
    let audit: Audit = read_json(&dir.join("audit.json"))?;
    let participants: Vec<Participant> = read_json(&dir.join("participants.json"))?;
    let interactions: Vec<Interaction> = read_json(&dir.join("interactions.json"))?;
    let annotations: Vec<Annotation> = read_json(&dir.join("annotations.json"))?;
    let groups: Vec<FocusedGroup> = read_json(&dir.join("groups.json"))?;
    let attributes: Vec<Attribute> = read_json(&dir.join("attributes.json"))?;
    Ok(SessionState {
        session: header.session,
        next_seq: header.next_seq,
        annotation_rev: header.annotation_rev,
        participants,
        interactions,
        annotations,
        groups,
        attributes,
        rankings: read_json(&dir.join("rankings.json"))?,
        likert: read_json(&dir.join("likert.json"))?,
        stage_transitions: transitions.stage,
        segment_transitions: transitions.segment,
        superseded_rankings: audit.superseded_rankings,
        superseded_likert: audit.superseded_likert,
    })
}

/// Remove every generation directory other than `keep`.
fn prune_generations(session_dir: &Path, keep: u64) -> Result<()> {
    let keep_name = format!("gen-{keep:08}");
    for entry in fs::read_dir(session_dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("gen-") && name != keep_name {
            fs::remove_dir_all(entry.path())?;
        }
    }
    Ok(())
}
