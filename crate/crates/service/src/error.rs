use std::path::PathBuf;

use breaktimes_core::{AssessmentError, CatalogError, ReplayError, ScoreError, SessionError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("cannot bind listener: {0}")]
    Bind(#[source] std::io::Error),
    #[error("scenario catalog failed to load: {0}")]
    CatalogLoadFailure(#[from] CatalogError),
    #[error("data directory {path} is not writable: {source}")]
    DataDirUnwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error(transparent)]
    Engine(#[from] SessionError),
    #[error("session {0} has not been completed yet")]
    NotCompleted(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
    #[error("malformed request: {0}")]
    MalformedRequest(String),
    #[error("{0}")]
    InvalidLevel(String),
    #[error("storage failure while {context}: {source}")]
    Storage {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("journal {path} is corrupt: {reason}")]
    CorruptJournal { path: PathBuf, reason: String },
}

impl From<ReplayError> for ServiceError {
    fn from(e: ReplayError) -> Self {
        match e {
            ReplayError::NotCompleted(id) => ServiceError::NotCompleted(id),
        }
    }
}

impl ServiceError {
    pub(crate) fn storage(context: impl Into<String>, source: std::io::Error) -> Self {
        ServiceError::Storage { context: context.into(), source }
    }

    /// Stable machine-readable code for API clients.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::PortInUse(_) => "port_in_use",
            ServiceError::Bind(_) => "bind_failed",
            ServiceError::CatalogLoadFailure(_) => "catalog_load_failure",
            ServiceError::DataDirUnwritable { .. } => "data_dir_unwritable",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownScenario(_) => "unknown_scenario",
            ServiceError::Engine(e) => e.code(),
            ServiceError::NotCompleted(_) => "not_completed",
            ServiceError::Score(_) => "inconsistent_record",
            ServiceError::Assessment(e) => e.code(),
            ServiceError::MalformedRequest(_) => "malformed_request",
            ServiceError::InvalidLevel(_) => "invalid_level",
            ServiceError::Storage { .. } => "storage_failure",
            ServiceError::CorruptJournal { .. } => "corrupt_journal",
        }
    }
}
