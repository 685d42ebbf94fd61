//! Break Times as a running service: scenario catalog, durable sessions,
//! surveys and reports behind a small JSON-over-HTTP API.
//!
//! Sessions persist as one append-only JSON-lines journal per session. An
//! event is acknowledged only after its journal line is on disk, and a
//! restarted service rebuilds every session by folding its journal.

pub mod api;
pub mod artwork;
pub mod clock;
pub mod config;
pub mod error;
pub mod journal;
pub mod server;
pub mod store;
pub mod surveys;

pub use api::{router, AppState};
pub use artwork::ArtworkExport;
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::ServiceConfig;
pub use error::ServiceError;
pub use server::{build_state, serve, serve_with_clock, ServiceHandle};
pub use store::{EventAck, LogRecord, SessionStore, StoredSession};
pub use surveys::SurveyStore;
