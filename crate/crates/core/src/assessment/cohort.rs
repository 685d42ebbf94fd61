use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stress::{score_stress, StressBand, StressResponse, SurveyPhase};
use super::AssessmentError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandHistogram {
    pub normal: u32,
    pub mild: u32,
    pub moderate: u32,
    pub severe: u32,
    pub extremely_severe: u32,
}

impl BandHistogram {
    pub fn get(&self, band: StressBand) -> u32 {
        match band {
            StressBand::Normal => self.normal,
            StressBand::Mild => self.mild,
            StressBand::Moderate => self.moderate,
            StressBand::Severe => self.severe,
            StressBand::ExtremelySevere => self.extremely_severe,
        }
    }

    fn bump(&mut self, band: StressBand) {
        let slot = match band {
            StressBand::Normal => &mut self.normal,
            StressBand::Mild => &mut self.mild,
            StressBand::Moderate => &mut self.moderate,
            StressBand::Severe => &mut self.severe,
            StressBand::ExtremelySevere => &mut self.extremely_severe,
        };
        *slot += 1;
    }

    pub fn total(&self) -> u32 {
        StressBand::ALL.iter().map(|&b| self.get(b)).sum()
    }

    pub fn severe_plus(&self) -> u32 {
        self.severe + self.extremely_severe
    }
}

/// Pre- versus post-session stress banding for a group of respondents.
/// Percentages are of each phase's own respondent count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub n_pre: u32,
    pub n_post: u32,
    pub pct_normal_pre: f64,
    pub pct_normal_post: f64,
    pub band_histogram_pre: BandHistogram,
    pub band_histogram_post: BandHistogram,
    /// Severe plus extremely severe share, post minus pre, in percentage points.
    pub severe_plus_change_pts: f64,
}

fn pct(count: u32, n: u32) -> f64 {
    100.0 * f64::from(count) / f64::from(n)
}

fn histogram(responses: &[StressResponse], phase: SurveyPhase) -> Result<BandHistogram, AssessmentError> {
    if responses.is_empty() {
        return Err(AssessmentError::EmptyCohort(phase));
    }
    let mut seen = HashSet::new();
    let mut hist = BandHistogram::default();
    for r in responses {
        if r.phase != phase {
            return Err(AssessmentError::MalformedResponse(format!(
                "{} response from {:?} in the {phase} list",
                r.phase, r.respondent_id
            )));
        }
        if !seen.insert(r.respondent_id.as_str()) {
            return Err(AssessmentError::DuplicateRespondent { respondent: r.respondent_id.clone(), phase });
        }
        hist.bump(score_stress(r)?.band);
    }
    Ok(hist)
}

pub fn cohort_report(pre: &[StressResponse], post: &[StressResponse]) -> Result<CohortReport, AssessmentError> {
    let hist_pre = histogram(pre, SurveyPhase::Pre)?;
    let hist_post = histogram(post, SurveyPhase::Post)?;
    let (n_pre, n_post) = (hist_pre.total(), hist_post.total());
    Ok(CohortReport {
        n_pre,
        n_post,
        pct_normal_pre: pct(hist_pre.normal, n_pre),
        pct_normal_post: pct(hist_post.normal, n_post),
        band_histogram_pre: hist_pre,
        band_histogram_post: hist_post,
        severe_plus_change_pts: pct(hist_post.severe_plus(), n_post) - pct(hist_pre.severe_plus(), n_pre),
    })
}

impl CohortReport {
    /// Plain-text table for terminal inspection.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<18} {:>10} {:>10}", "Stress band", "Pre", "Post");
        let _ = writeln!(out, "{}", "-".repeat(40));
        for band in StressBand::ALL {
            let (pre, post) = (self.band_histogram_pre.get(band), self.band_histogram_post.get(band));
            let _ = writeln!(
                out,
                "{:<18} {:>3} ({:>3.0}%) {:>3} ({:>3.0}%)",
                band.label(),
                pre,
                pct(pre, self.n_pre),
                post,
                pct(post, self.n_post)
            );
        }
        let _ = writeln!(out, "{}", "-".repeat(40));
        let _ = writeln!(out, "{:<18} {:>10} {:>10}", "Respondents", self.n_pre, self.n_post);
        let _ = writeln!(
            out,
            "{:<18} {:>9.1}% {:>9.1}%",
            "Normal", self.pct_normal_pre, self.pct_normal_post
        );
        let _ = writeln!(out, "Severe+ change: {:+.1} percentage points", self.severe_plus_change_pts);
        out
    }
}
