//! Completion score and the encouragement message that goes with it.
//!
//! points = 10 per coloured cell + one per unused second of the break.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Scenario;
use crate::session::CompletionRecord;

pub const POINTS_PER_CELL: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Gentle,
    Great,
    Outstanding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub points: u64,
    pub max_points: u64,
    pub ratio: f64,
    pub tier: Tier,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("completion record does not fit scenario {scenario}: {reason}")]
    InconsistentRecord { scenario: String, reason: String },
}

pub fn compute_score(record: &CompletionRecord, scenario: &Scenario) -> Result<Score, ScoreError> {
    let budget = scenario.level.budget_seconds();
    let mask_len = scenario.mask.len() as u64;
    let inconsistent = |reason: String| ScoreError::InconsistentRecord { scenario: scenario.id.clone(), reason };
    if record.elapsed_seconds > budget {
        return Err(inconsistent(format!("elapsed {}s exceeds the {budget}s budget", record.elapsed_seconds)));
    }
    if u64::from(record.cells_colored) > mask_len {
        return Err(inconsistent(format!(
            "{} cells coloured but only {mask_len} are paintable",
            record.cells_colored
        )));
    }

    let points = POINTS_PER_CELL * u64::from(record.cells_colored) + (budget - record.elapsed_seconds);
    let max_points = POINTS_PER_CELL * mask_len + budget;
    // Integer comparison keeps the tier boundaries exact.
    let tier = if points * 100 >= max_points * 75 {
        Tier::Outstanding
    } else if points * 100 >= max_points * 40 {
        Tier::Great
    } else {
        Tier::Gentle
    };
    Ok(Score {
        points,
        max_points,
        ratio: points as f64 / max_points as f64,
        tier,
    })
}

pub fn message_for(score: &Score) -> &'static str {
    match score.tier {
        Tier::Outstanding => "What a beautiful piece! You filled your canvas with colour and music. Carry this calm with you.",
        Tier::Great => "Lovely work! Your colours made a melody all of their own. Well done for taking this time for yourself.",
        Tier::Gentle => "Thank you for taking a moment to create. Every colour you added is a small act of care for yourself.",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{BreakLevel, Palette};
    use crate::grid::Cell;
    use crate::session::FinishReason;

    fn quick_with_mask(n: u16) -> Scenario {
        Scenario {
            id: "q".into(),
            title: "q".into(),
            level: BreakLevel::Quick,
            width: 12,
            height: 12,
            mask: (0..n).map(|i| Cell::new(i / 12, i % 12)).collect(),
            palette: Palette::default_diatonic(),
            reference_image: "r.ppm".into(),
        }
    }

    fn record(elapsed_seconds: u64, cells_colored: u32) -> CompletionRecord {
        CompletionRecord { elapsed_seconds, cells_colored, finished_by: FinishReason::UserFinish }
    }

    #[test]
    fn worked_example() {
        // 10*80 + (300-240) = 860 of 10*100 + 300 = 1300
        let s = compute_score(&record(240, 80), &quick_with_mask(100)).unwrap();
        assert_eq!((s.points, s.max_points), (860, 1300));
        assert!((s.ratio - 860.0 / 1300.0).abs() < 1e-12);
        assert!((s.ratio - 0.6615).abs() < 1e-4);
        assert_eq!(s.tier, Tier::Great);
    }

    #[test]
    fn zero_and_perfect() {
        let sc = quick_with_mask(100);
        let zero = compute_score(&record(300, 0), &sc).unwrap();
        assert_eq!((zero.points, zero.tier), (0, Tier::Gentle));
        let perfect = compute_score(&record(0, 100), &sc).unwrap();
        assert_eq!(perfect.points, perfect.max_points);
        assert_eq!(perfect.ratio, 1.0);
        assert_eq!(perfect.tier, Tier::Outstanding);
    }

    #[test]
    fn tier_boundaries_are_inclusive() {
        // mask 100, budget 300 -> max 1300; 40% = 520, 75% = 975
        let sc = quick_with_mask(100);
        assert_eq!(compute_score(&record(300, 52), &sc).unwrap().tier, Tier::Great);
        assert_eq!(compute_score(&record(300, 51), &sc).unwrap().tier, Tier::Gentle);
        assert_eq!(compute_score(&record(25, 70), &sc).unwrap().tier, Tier::Outstanding);
        assert_eq!(compute_score(&record(26, 70), &sc).unwrap().tier, Tier::Great);
    }

    #[test]
    fn inconsistent_records_rejected() {
        let sc = quick_with_mask(100);
        assert!(compute_score(&record(301, 0), &sc).is_err());
        assert!(compute_score(&record(0, 101), &sc).is_err());
    }

    #[test]
    fn messages_stay_positive() {
        const DENYLIST: [&str; 10] =
            ["fail", "bad", "poor", "wrong", "worse", "lose", "lost", "not enough", "disappoint", "only"];
        for tier in [Tier::Gentle, Tier::Great, Tier::Outstanding] {
            let score = Score { points: 0, max_points: 1, ratio: 0.0, tier };
            let msg = message_for(&score).to_lowercase();
            for word in DENYLIST {
                assert!(!msg.contains(word), "{tier:?} message contains {word:?}");
            }
            assert_eq!(message_for(&score), message_for(&score));
        }
        let distinct: std::collections::HashSet<_> = [Tier::Gentle, Tier::Great, Tier::Outstanding]
            .into_iter()
            .map(|tier| message_for(&Score { points: 0, max_points: 1, ratio: 0.0, tier }))
            .collect();
        assert_eq!(distinct.len(), 3);
    }
}
