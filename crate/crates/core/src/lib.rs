//! Engine for Break Times, a short art-therapy break: pick a scene, colour a
//! grid where every colour plays a note, get a score and a replay of the
//! artwork, then say how you feel.
//!
//! The crate is headless and clock-free. Every time-dependent operation takes
//! the current time as an argument so sessions can be driven by tests,
//! recovered from logs, or run behind a service.

pub mod assessment;
pub mod catalog;
pub mod grid;
pub mod replay;
pub mod rng;
pub mod score;
pub mod session;
pub mod soundscape;

pub use assessment::{
    aggregate_feedback, band_of, cohort_report, score_stress, AssessmentError, BandHistogram,
    CohortReport, FeedbackCategory, FeedbackResponse, FeedbackSummary, Questionnaire,
    RatingHistogram, StressBand, StressResponse, StressResult, SurveyPhase,
};
pub use catalog::{
    load_catalog, BreakLevel, Catalog, CatalogError, Palette, PaletteEntry, Rgb, Scenario,
    ScenarioFile,
};
pub use grid::{Cell, ColorIndex, GridState};
pub use replay::{build_replay, replay_summary, ReplayError, ReplayScript, ReplayStep, ReplaySummary};
pub use score::{compute_score, message_for, Score, ScoreError, Tier};
pub use session::{
    ActionKind, ActionOutcome, AlertEvent, CompletionRecord, Effects, FinishReason, PaintAction,
    Phase, SessionError, SessionEvent, SessionOptions, SessionState,
};
pub use soundscape::{
    events_for_actions, frequency_hz, note_for_color, NoteEvent, NoteSpec, SoundError, Timing,
};
