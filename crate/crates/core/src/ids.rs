//! Opaque identifiers minted by the store.
//!
//! Ids sort lexicographically in creation order: a context or session id
//! carries a fixed-width hex timestamp and a store-wide counter, and every
//! entity inside a session carries the session key plus a per-session
//! counter.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(ContextId);
id_type!(SessionId);
id_type!(ParticipantId);
id_type!(InteractionId);
id_type!(AnnotationId);
id_type!(GroupId);
id_type!(AttributeId);

/// Entity kinds minted inside a session.
#[derive(Debug, Clone, Copy)]
pub enum IdKind {
    Participant,
    Interaction,
    Annotation,
    Group,
    Attribute,
}

impl IdKind {
    fn prefix(self) -> &'static str {
        match self {
            IdKind::Participant => "par",
            IdKind::Interaction => "int",
            IdKind::Annotation => "ann",
            IdKind::Group => "grp",
            IdKind::Attribute => "att",
        }
    }
}

pub(crate) fn root_id(prefix: &str, millis: i64, seq: u64) -> String {
    format!("{prefix}-{:011x}{:04x}", millis.max(0), seq & 0xffff)
}

/// The part of a session id that scopes entity ids.
pub(crate) fn session_key(session: &SessionId) -> &str {
    session.0.strip_prefix("ses-").unwrap_or(&session.0)
}

pub(crate) fn entity_id(session: &SessionId, kind: IdKind, seq: u64) -> String {
    format!("{}-{}-{:06x}", kind.prefix(), session_key(session), seq)
}
