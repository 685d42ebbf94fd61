//! Append-only survey storage: `stress.jsonl` and `feedback.jsonl` under
//! `<data_dir>/surveys/`.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use breaktimes_core::{
    aggregate_feedback, cohort_report, score_stress, AssessmentError, CohortReport, FeedbackResponse,
    FeedbackSummary, StressResponse, StressResult, SurveyPhase,
};

use crate::error::ServiceError;
use crate::journal::{read_lines, FileJournal, Journal};

struct Inner {
    stress: Vec<StressResponse>,
    feedback: Vec<FeedbackResponse>,
    stress_log: FileJournal,
    feedback_log: FileJournal,
}

pub struct SurveyStore {
    dir: PathBuf,
    inner: Mutex<Inner>,
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, ServiceError> {
    read_lines(path)
        .map_err(|e| ServiceError::storage("reading survey records", e))?
        .iter()
        .enumerate()
        .map(|(n, line)| {
            serde_json::from_str(line).map_err(|e| ServiceError::CorruptJournal {
                path: path.to_path_buf(),
                reason: format!("line {}: {e}", n + 1),
            })
        })
        .collect()
}

impl SurveyStore {
    pub fn open(data_dir: &Path) -> Result<Self, ServiceError> {
        let dir = data_dir.join("surveys");
        std::fs::create_dir_all(&dir).map_err(|e| ServiceError::storage("creating the surveys directory", e))?;
        let (stress_path, feedback_path) = (dir.join("stress.jsonl"), dir.join("feedback.jsonl"));
        let inner = Inner {
            stress: load(&stress_path)?,
            feedback: load(&feedback_path)?,
            stress_log: FileJournal::open(&stress_path).map_err(|e| ServiceError::storage("opening survey log", e))?,
            feedback_log: FileJournal::open(&feedback_path)
                .map_err(|e| ServiceError::storage("opening survey log", e))?,
        };
        Ok(Self { dir, inner: Mutex::new(inner) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn inner(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Scores and stores a stress response. One response per respondent and
    /// phase.
    pub fn submit_stress(&self, response: StressResponse) -> Result<StressResult, ServiceError> {
        let result = score_stress(&response)?;
        let mut inner = self.inner();
        if inner
            .stress
            .iter()
            .any(|r| r.respondent_id == response.respondent_id && r.phase == response.phase)
        {
            return Err(AssessmentError::DuplicateRespondent {
                respondent: response.respondent_id,
                phase: response.phase,
            }
            .into());
        }
        let line = serde_json::to_vec(&response).expect("responses serialize");
        inner
            .stress_log
            .append(&line)
            .map_err(|e| ServiceError::storage("appending a stress response", e))?;
        inner.stress.push(response);
        Ok(result)
    }

    pub fn submit_feedback(&self, response: FeedbackResponse) -> Result<(), ServiceError> {
        response.validate()?;
        let mut inner = self.inner();
        let line = serde_json::to_vec(&response).expect("responses serialize");
        inner
            .feedback_log
            .append(&line)
            .map_err(|e| ServiceError::storage("appending a feedback response", e))?;
        inner.feedback.push(response);
        Ok(())
    }

    pub fn cohort_report(&self) -> Result<CohortReport, ServiceError> {
        let inner = self.inner();
        let (pre, post): (Vec<StressResponse>, Vec<StressResponse>) =
            inner.stress.iter().cloned().partition(|r| r.phase == SurveyPhase::Pre);
        Ok(cohort_report(&pre, &post)?)
    }

    pub fn feedback_summary(&self) -> FeedbackSummary {
        aggregate_feedback(&self.inner().feedback)
    }

    pub fn stress_count(&self) -> usize {
        self.inner().stress.len()
    }
}

#[cfg(test)]
mod tests {
    use chrono::DateTime;

    use super::*;

    fn response(id: &str, phase: SurveyPhase, items: Vec<u8>) -> StressResponse {
        StressResponse { respondent_id: id.into(), phase, items, taken_at: DateTime::UNIX_EPOCH }
    }

    #[test]
    fn stores_scores_and_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let store = SurveyStore::open(dir.path()).unwrap();
        let r = store.submit_stress(response("a", SurveyPhase::Pre, vec![0; 7])).unwrap();
        assert_eq!(r.score, 0);
        let err = store.submit_stress(response("a", SurveyPhase::Pre, vec![1; 7])).unwrap_err();
        assert_eq!(err.code(), "duplicate_respondent");
        store.submit_stress(response("a", SurveyPhase::Post, vec![1; 7])).unwrap();
        let err = store.submit_stress(response("b", SurveyPhase::Pre, vec![1; 6])).unwrap_err();
        assert_eq!(err.code(), "malformed_response");
        assert_eq!(store.stress_count(), 2);
        drop(store);

        let reopened = SurveyStore::open(dir.path()).unwrap();
        assert_eq!(reopened.stress_count(), 2);
        let report = reopened.cohort_report().unwrap();
        assert_eq!((report.n_pre, report.n_post), (1, 1));
    }

    #[test]
    fn report_needs_both_phases() {
        let dir = tempfile::tempdir().unwrap();
        let store = SurveyStore::open(dir.path()).unwrap();
        store.submit_stress(response("a", SurveyPhase::Pre, vec![0; 7])).unwrap();
        assert_eq!(store.cohort_report().unwrap_err().code(), "empty_cohort");
    }
}
