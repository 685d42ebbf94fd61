//! Evaluation instruments: the seven-item stress questionnaire with severity
//! banding, pre/post cohort reports, and five-category feedback ratings.

mod cohort;
mod feedback;
mod questionnaire;
mod stress;

use thiserror::Error;

pub use cohort::{cohort_report, BandHistogram, CohortReport};
pub use feedback::{aggregate_feedback, FeedbackCategory, FeedbackResponse, FeedbackSummary, RatingHistogram};
pub use questionnaire::Questionnaire;
pub use stress::{
    band_of, score_stress, StressBand, StressResponse, StressResult, SurveyPhase, ITEM_COUNT, MAX_ITEM,
    MAX_SCORE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssessmentError {
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("stress score {0} is outside 0..=42")]
    OutOfRange(u32),
    #[error("respondent {respondent:?} answered the {phase} survey more than once")]
    DuplicateRespondent { respondent: String, phase: SurveyPhase },
    #[error("the {0} cohort is empty")]
    EmptyCohort(SurveyPhase),
}

impl AssessmentError {
    pub fn code(&self) -> &'static str {
        match self {
            AssessmentError::MalformedResponse(_) => "malformed_response",
            AssessmentError::OutOfRange(_) => "out_of_range",
            AssessmentError::DuplicateRespondent { .. } => "duplicate_respondent",
            AssessmentError::EmptyCohort(_) => "empty_cohort",
        }
    }
}
