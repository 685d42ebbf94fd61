//! Colour-to-note sonification. Every palette colour owns a pitch; painting a
//! cell plays it, erasing is silent. Synthesis itself happens in the client,
//! this module only produces note events.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Palette, PITCH_RANGE};
use crate::grid::ColorIndex;
use crate::session::{ActionKind, PaintAction};

pub const NOTE_DURATION_MS: u32 = 350;
pub const NOTE_VELOCITY: f32 = 0.8;
pub const MIN_NOTE_DURATION_MS: u32 = 50;

/// Pitch number of concert A.
pub const REFERENCE_PITCH: u8 = 69;
pub const REFERENCE_HZ: f64 = 440.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SoundError {
    #[error("colour index {0} is not in the palette")]
    InvalidColor(ColorIndex),
    #[error("pitch {0} is outside the playable range 21..=108")]
    OutOfRange(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteSpec {
    pub pitch: u8,
    pub duration_ms: u32,
    pub velocity: f32,
}

impl NoteSpec {
    pub fn frequency_hz(&self) -> f64 {
        frequency_hz(self.pitch).expect("NoteSpec pitch is always in range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub onset_ms: u64,
    pub note: NoteSpec,
    /// Sequence number of the paint action that produced this note.
    pub source_seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timing {
    /// Onsets follow the original action times.
    Live,
    /// The k-th note sounds at `k * cadence_ms`.
    FixedCadence(u64),
}

pub fn note_for_color(palette: &Palette, color: ColorIndex) -> Result<NoteSpec, SoundError> {
    let entry = palette.get(color).ok_or(SoundError::InvalidColor(color))?;
    Ok(NoteSpec {
        pitch: entry.note,
        duration_ms: NOTE_DURATION_MS,
        velocity: NOTE_VELOCITY,
    })
}

/// Twelve-tone equal temperament, A4 = 440 Hz.
pub fn frequency_hz(pitch: u8) -> Result<f64, SoundError> {
    if !PITCH_RANGE.contains(&pitch) {
        return Err(SoundError::OutOfRange(pitch));
    }
    let semitones = f64::from(pitch) - f64::from(REFERENCE_PITCH);
    Ok(REFERENCE_HZ * (semitones / 12.0).exp2())
}

/// One note per paint action, in log order. Erases, and paints whose colour
/// the palette does not know, produce nothing.
pub fn events_for_actions(palette: &Palette, actions: &[PaintAction], timing: Timing) -> Vec<NoteEvent> {
    actions
        .iter()
        .filter_map(|action| match action.kind {
            ActionKind::Paint { color } => note_for_color(palette, color).ok().map(|note| (action, note)),
            ActionKind::Erase => None,
        })
        .enumerate()
        .map(|(k, (action, note))| NoteEvent {
            onset_ms: match timing {
                Timing::Live => action.at_ms,
                Timing::FixedCadence(cadence) => k as u64 * cadence,
            },
            note,
            source_seq: action.seq,
        })
        .collect()
}
