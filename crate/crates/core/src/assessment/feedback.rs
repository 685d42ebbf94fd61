use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AssessmentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackCategory {
    Functionality,
    Technical,
    Experience,
    Engagement,
    Relaxation,
}

impl FeedbackCategory {
    pub const ALL: [FeedbackCategory; 5] = [
        FeedbackCategory::Functionality,
        FeedbackCategory::Technical,
        FeedbackCategory::Experience,
        FeedbackCategory::Engagement,
        FeedbackCategory::Relaxation,
    ];
}

impl fmt::Display for FeedbackCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackCategory::Functionality => "functionality",
            FeedbackCategory::Technical => "technical",
            FeedbackCategory::Experience => "experience",
            FeedbackCategory::Engagement => "engagement",
            FeedbackCategory::Relaxation => "relaxation",
        })
    }
}

/// Post-session ratings, 1 (lowest) to 5 (highest) in every category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackResponse {
    pub respondent_id: String,
    pub ratings: BTreeMap<FeedbackCategory, u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl FeedbackResponse {
    pub fn validate(&self) -> Result<(), AssessmentError> {
        for cat in FeedbackCategory::ALL {
            match self.ratings.get(&cat) {
                None => return Err(AssessmentError::MalformedResponse(format!("missing {cat} rating"))),
                Some(r) if !(1..=5).contains(r) => {
                    return Err(AssessmentError::MalformedResponse(format!("{cat} rating {r} outside 1..=5")))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Counts per rating value; index 0 holds rating 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatingHistogram(pub [u32; 5]);

impl RatingHistogram {
    pub fn count(&self, rating: u8) -> u32 {
        match rating {
            1..=5 => self.0[usize::from(rating - 1)],
            _ => 0,
        }
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Most frequent ratings (ties included), ascending. Empty if no data.
    pub fn modes(&self) -> Vec<u8> {
        let max = self.0.iter().copied().max().unwrap_or(0);
        if max == 0 {
            return Vec::new();
        }
        (1..=5).filter(|&r| self.count(r) == max).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackSummary {
    pub n: u32,
    pub categories: BTreeMap<FeedbackCategory, RatingHistogram>,
}

impl FeedbackSummary {
    pub fn histogram(&self, category: FeedbackCategory) -> RatingHistogram {
        self.categories.get(&category).copied().unwrap_or_default()
    }
}

/// Per-category rating counts. Expects validated responses; a rating outside
/// 1..=5 is not counted.
pub fn aggregate_feedback(responses: &[FeedbackResponse]) -> FeedbackSummary {
    let mut categories: BTreeMap<_, _> =
        FeedbackCategory::ALL.iter().map(|&c| (c, RatingHistogram::default())).collect();
    for response in responses {
        for (cat, &rating) in &response.ratings {
            if (1..=5).contains(&rating) {
                if let Some(h) = categories.get_mut(cat) {
                    h.0[usize::from(rating - 1)] += 1;
                }
            }
        }
    }
    FeedbackSummary { n: responses.len() as u32, categories }
}
