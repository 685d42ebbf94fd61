use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::AssessmentError;

pub const ITEM_COUNT: usize = 7;
pub const MAX_ITEM: u8 = 3;
/// Seven items of at most 3, doubled.
pub const MAX_SCORE: u32 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurveyPhase {
    Pre,
    Post,
}

impl fmt::Display for SurveyPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurveyPhase::Pre => "pre",
            SurveyPhase::Post => "post",
        })
    }
}

/// Stress severity, ordered from least to most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressBand {
    Normal,
    Mild,
    Moderate,
    Severe,
    ExtremelySevere,
}

impl StressBand {
    pub const ALL: [StressBand; 5] = [
        StressBand::Normal,
        StressBand::Mild,
        StressBand::Moderate,
        StressBand::Severe,
        StressBand::ExtremelySevere,
    ];

    /// Inclusive score interval of the band.
    pub const fn range(self) -> (u32, u32) {
        match self {
            StressBand::Normal => (0, 14),
            StressBand::Mild => (15, 18),
            StressBand::Moderate => (19, 25),
            StressBand::Severe => (26, 33),
            StressBand::ExtremelySevere => (34, MAX_SCORE),
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            StressBand::Normal => "Normal",
            StressBand::Mild => "Mild",
            StressBand::Moderate => "Moderate",
            StressBand::Severe => "Severe",
            StressBand::ExtremelySevere => "Extremely Severe",
        }
    }

    pub const fn is_severe_plus(self) -> bool {
        matches!(self, StressBand::Severe | StressBand::ExtremelySevere)
    }
}

impl fmt::Display for StressBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressResponse {
    pub respondent_id: String,
    pub phase: SurveyPhase,
    /// One answer per item, 0 ("did not apply") to 3 ("applied very much").
    pub items: Vec<u8>,
    pub taken_at: DateTime<Utc>,
}

impl StressResponse {
    pub fn validate(&self) -> Result<(), AssessmentError> {
        if self.items.len() != ITEM_COUNT {
            return Err(AssessmentError::MalformedResponse(format!(
                "expected {ITEM_COUNT} items, got {}",
                self.items.len()
            )));
        }
        if let Some((i, v)) = self.items.iter().enumerate().find(|(_, &v)| v > MAX_ITEM) {
            return Err(AssessmentError::MalformedResponse(format!("item {} has answer {v}, expected 0..=3", i + 1)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressResult {
    pub score: u32,
    pub band: StressBand,
    pub abnormal: bool,
}

/// Doubles the raw item sum so scores sit on the full 21-item scale.
pub fn score_stress(response: &StressResponse) -> Result<StressResult, AssessmentError> {
    response.validate()?;
    let raw: u32 = response.items.iter().map(|&v| u32::from(v)).sum();
    let score = 2 * raw;
    let band = band_of(score)?;
    Ok(StressResult { score, band, abnormal: band != StressBand::Normal })
}

pub fn band_of(score: u32) -> Result<StressBand, AssessmentError> {
    StressBand::ALL
        .into_iter()
        .find(|b| {
            let (lo, hi) = b.range();
            (lo..=hi).contains(&score)
        })
        .ok_or(AssessmentError::OutOfRange(score))
}
