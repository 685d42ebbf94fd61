use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stress::{ITEM_COUNT, MAX_ITEM};
use super::AssessmentError;

const STOCK: &str = include_str!("../../../../content/stress_questionnaire.json");

/// Item wording and the answer legend for the stress questionnaire. Kept in a
/// file so the wording can change without touching scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Questionnaire {
    pub title: String,
    #[serde(default)]
    pub instructions: String,
    pub items: Vec<String>,
    /// Meaning of answers 0..=3, in order.
    pub legend: Vec<String>,
}

impl Questionnaire {
    /// The bundled stress items.
    pub fn stock() -> Self {
        Self::from_json(STOCK).expect("bundled questionnaire is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, AssessmentError> {
        let q: Questionnaire =
            serde_json::from_str(text).map_err(|e| AssessmentError::MalformedResponse(e.to_string()))?;
        q.validate()?;
        Ok(q)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AssessmentError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| AssessmentError::MalformedResponse(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), AssessmentError> {
        if self.items.len() != ITEM_COUNT {
            return Err(AssessmentError::MalformedResponse(format!(
                "questionnaire needs {ITEM_COUNT} items, has {}",
                self.items.len()
            )));
        }
        if self.legend.len() != usize::from(MAX_ITEM) + 1 {
            return Err(AssessmentError::MalformedResponse(format!(
                "legend needs {} entries, has {}",
                MAX_ITEM + 1,
                self.legend.len()
            )));
        }
        if self.items.iter().chain(&self.legend).any(|s| s.trim().is_empty()) {
            return Err(AssessmentError::MalformedResponse("blank item or legend text".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stock_questionnaire_has_seven_items() {
        let q = Questionnaire::stock();
        assert_eq!(q.items.len(), 7);
        assert_eq!(q.legend.len(), 4);
    }

    #[test]
    fn wrong_item_count_rejected() {
        let mut q = Questionnaire::stock();
        q.items.pop();
        let text = serde_json::to_string(&q).unwrap();
        assert!(Questionnaire::from_json(&text).is_err());
    }
}
