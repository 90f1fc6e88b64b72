//! Participatory elicitation of alignment axes: a community chats with a
//! language model, codes the transcripts, clusters the codes, and ranks the
//! resulting attributes over a facilitated discussion.
//!
//! [`session::Platform`] is the main entry point; [`http::router`] exposes
//! it over HTTP with a server-sent event stream.

pub mod affinity;
pub mod clock;
pub mod coding;
pub mod config;
pub mod consensus;
pub mod error;
pub mod fixtures;
pub mod http;
pub mod ids;
pub mod llm;
pub mod model;
pub mod session;
pub mod state;
pub mod store;

pub use error::{Error, Result};
