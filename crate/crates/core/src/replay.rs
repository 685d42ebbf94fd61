//! Replay of a finished artwork: every logged gesture, in order, one every
//! 400 ms. Paints carry their note; erases take a slot but stay silent.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Palette;
use crate::grid::{Cell, GridState};
use crate::session::{ActionKind, PaintAction, SessionState};
use crate::soundscape::{note_for_color, NoteEvent, NOTE_DURATION_MS};

pub const REPLAY_CADENCE_MS: u64 = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayStep {
    pub onset_ms: u64,
    pub action: PaintAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<NoteEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayScript {
    pub scenario_id: String,
    pub steps: Vec<ReplayStep>,
    pub total_duration_ms: u64,
}

impl ReplayScript {
    /// Replays every step onto an empty grid over `mask`.
    pub fn final_grid<'a>(&self, mask: impl IntoIterator<Item = &'a Cell>) -> GridState {
        let mut grid = GridState::empty(mask);
        for step in &self.steps {
            step.action.apply_to(&mut grid);
        }
        grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub step_count: usize,
    pub duration_ms: u64,
    pub distinct_cells_touched: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("session {0} has not been completed yet")]
    NotCompleted(String),
}

pub fn build_replay(session: &SessionState, palette: &Palette) -> Result<ReplayScript, ReplayError> {
    if session.completion().is_none() {
        return Err(ReplayError::NotCompleted(session.session_id().to_owned()));
    }
    let steps: Vec<ReplayStep> = session
        .log()
        .iter()
        .enumerate()
        .map(|(slot, action)| {
            let onset_ms = slot as u64 * REPLAY_CADENCE_MS;
            let note = match action.kind {
                ActionKind::Paint { color } => note_for_color(palette, color)
                    .ok()
                    .map(|note| NoteEvent { onset_ms, note, source_seq: action.seq }),
                ActionKind::Erase => None,
            };
            ReplayStep { onset_ms, action: *action, note }
        })
        .collect();
    let total_duration_ms = match steps.len() {
        0 => 0,
        n => (n as u64 - 1) * REPLAY_CADENCE_MS + u64::from(NOTE_DURATION_MS),
    };
    Ok(ReplayScript {
        scenario_id: session.scenario_id().to_owned(),
        steps,
        total_duration_ms,
    })
}

pub fn replay_summary(script: &ReplayScript) -> ReplaySummary {
    let cells: BTreeSet<Cell> = script.steps.iter().map(|s| s.action.cell).collect();
    ReplaySummary {
        step_count: script.steps.len(),
        duration_ms: script.total_duration_ms,
        distinct_cells_touched: cells.len(),
    }
}
