//! The live session state machine.
//!
//! A session walks `Artmaking -> Completion -> Closure -> MainMenu` exactly
//! once. The grid is a cache of the action log: folding the log over an empty
//! grid always reproduces it. Every operation takes the current time from the
//! caller and either applies completely or returns an error leaving the
//! session untouched.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{BreakLevel, Scenario};
use crate::grid::{Cell, ColorIndex, GridState};
use crate::soundscape::{note_for_color, NoteEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    MainMenu,
    Artmaking,
    Completion,
    Closure,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::MainMenu => "main_menu",
            Phase::Artmaking => "artmaking",
            Phase::Completion => "completion",
            Phase::Closure => "closure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ActionKind {
    Paint { color: ColorIndex },
    Erase,
}

/// One logged paint or erase gesture. `at_ms` counts from session start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PaintAction {
    pub seq: u64,
    pub at_ms: u64,
    pub cell: Cell,
    pub kind: ActionKind,
}

impl PaintAction {
    /// Applies this action to `grid`; false if the cell is not paintable.
    pub fn apply_to(&self, grid: &mut GridState) -> bool {
        let color = match self.kind {
            ActionKind::Paint { color } => Some(color),
            ActionKind::Erase => None,
        };
        grid.set(self.cell, color)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    UserFinish,
    TimerAlert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub elapsed_seconds: u64,
    pub cells_colored: u32,
    pub finished_by: FinishReason,
}

/// Emitted once, when the break timer runs out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertEvent {
    /// Milliseconds since session start at which the tick noticed expiry.
    pub at_ms: u64,
    pub budget_seconds: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("operation not allowed in the {0} phase")]
    WrongPhase(Phase),
    #[error("cell {0} is not paintable")]
    OutOfMask(Cell),
    #[error("colour index {0} is not in the palette")]
    InvalidColor(ColorIndex),
    #[error("the break timer has run out")]
    SessionExpired,
}

impl SessionError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::WrongPhase(_) => "wrong_phase",
            SessionError::OutOfMask(_) => "out_of_mask",
            SessionError::InvalidColor(_) => "invalid_color",
            SessionError::SessionExpired => "session_expired",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionOptions {
    /// Move straight to Completion when the timer alert fires.
    pub auto_finish_on_alert: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self { auto_finish_on_alert: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionOutcome {
    pub action: PaintAction,
    /// Only paints make a sound.
    pub note: Option<NoteEvent>,
}

/// Input to [`SessionState::handle`]. This is also the unit the service logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SessionEvent {
    Paint { cell: Cell, color: ColorIndex },
    Erase { cell: Cell },
    Toggle,
    Tick,
    Finish,
    Close { mood: String },
}

/// Everything an event produced, for transport back to a client.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Effects {
    pub action: Option<PaintAction>,
    pub note: Option<NoteEvent>,
    pub alert: Option<AlertEvent>,
    pub completion: Option<CompletionRecord>,
    pub reference_visible: Option<bool>,
}

impl Effects {
    /// False for a tick that found nothing to do.
    pub fn changed_state(&self) -> bool {
        self.action.is_some()
            || self.alert.is_some()
            || self.completion.is_some()
            || self.reference_visible.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    session_id: String,
    scenario: Arc<Scenario>,
    options: SessionOptions,
    phase: Phase,
    started_at_ms: u64,
    deadline_ms: u64,
    log: Vec<PaintAction>,
    grid: GridState,
    reference_visible: bool,
    alert_fired: bool,
    completion: Option<CompletionRecord>,
    mood: Option<String>,
}

impl SessionState {
    /// Pressing "Start" on a chosen scenario: the timer starts now.
    pub fn start(session_id: impl Into<String>, scenario: Arc<Scenario>, now_ms: u64) -> Self {
        Self::start_with(session_id, scenario, now_ms, SessionOptions::default())
    }

    pub fn start_with(
        session_id: impl Into<String>,
        scenario: Arc<Scenario>,
        now_ms: u64,
        options: SessionOptions,
    ) -> Self {
        let grid = GridState::empty(&scenario.mask);
        Self {
            session_id: session_id.into(),
            deadline_ms: now_ms + scenario.level.budget_ms(),
            scenario,
            options,
            phase: Phase::Artmaking,
            started_at_ms: now_ms,
            log: Vec::new(),
            grid,
            reference_visible: false,
            alert_fired: false,
            completion: None,
            mood: None,
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    pub fn scenario_id(&self) -> &str {
        &self.scenario.id
    }

    pub fn level(&self) -> BreakLevel {
        self.scenario.level
    }

    pub fn options(&self) -> SessionOptions {
        self.options
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn started_at_ms(&self) -> u64 {
        self.started_at_ms
    }

    pub fn deadline_ms(&self) -> u64 {
        self.deadline_ms
    }

    pub fn log(&self) -> &[PaintAction] {
        &self.log
    }

    pub fn grid(&self) -> &GridState {
        &self.grid
    }

    pub fn reference_visible(&self) -> bool {
        self.reference_visible
    }

    pub fn alert_fired(&self) -> bool {
        self.alert_fired
    }

    pub fn completion(&self) -> Option<&CompletionRecord> {
        self.completion.as_ref()
    }

    /// The closing mood text. `Some("")` means the user declined to share.
    pub fn mood(&self) -> Option<&str> {
        self.mood.as_deref()
    }

    /// Closed sessions are read-only.
    pub fn is_terminal(&self) -> bool {
        self.phase == Phase::MainMenu && self.completion.is_some()
    }

    /// Milliseconds left on the break timer at `now_ms`.
    pub fn remaining_ms(&self, now_ms: u64) -> u64 {
        self.deadline_ms.saturating_sub(now_ms)
    }

    fn require_artmaking(&self) -> Result<(), SessionError> {
        match self.phase {
            Phase::Artmaking => Ok(()),
            other => Err(SessionError::WrongPhase(other)),
        }
    }

    /// Paints or erases one cell. Painting over a colour replaces it; erasing
    /// an empty cell is accepted and still logged.
    pub fn apply_action(&mut self, kind: ActionKind, cell: Cell, now_ms: u64) -> Result<ActionOutcome, SessionError> {
        self.require_artmaking()?;
        if now_ms >= self.deadline_ms {
            return Err(SessionError::SessionExpired);
        }
        if !self.grid.contains(cell) {
            return Err(SessionError::OutOfMask(cell));
        }
        let note = match kind {
            ActionKind::Paint { color } => {
                let spec = note_for_color(&self.scenario.palette, color)
                    .map_err(|_| SessionError::InvalidColor(color))?;
                Some(spec)
            }
            ActionKind::Erase => None,
        };

        // Clamp so a clock that steps backwards cannot reorder the log.
        let last_at = self.log.last().map_or(0, |a| a.at_ms);
        let at_ms = now_ms.saturating_sub(self.started_at_ms).max(last_at);
        let action = PaintAction {
            seq: self.log.len() as u64,
            at_ms,
            cell,
            kind,
        };
        action.apply_to(&mut self.grid);
        self.log.push(action);

        Ok(ActionOutcome {
            action,
            note: note.map(|note| NoteEvent { onset_ms: at_ms, note, source_seq: action.seq }),
        })
    }

    /// Shows or hides the reference picture. Not part of the artwork log.
    pub fn toggle_reference(&mut self) -> Result<bool, SessionError> {
        self.require_artmaking()?;
        self.reference_visible = !self.reference_visible;
        Ok(self.reference_visible)
    }

    /// Advances the break timer. Fires the alert at most once; with
    /// auto-finish enabled the session moves to Completion at the same time.
    pub fn tick(&mut self, now_ms: u64) -> Option<AlertEvent> {
        if self.phase != Phase::Artmaking || self.alert_fired || now_ms < self.deadline_ms {
            return None;
        }
        self.alert_fired = true;
        if self.options.auto_finish_on_alert {
            self.complete(self.level().budget_seconds(), FinishReason::TimerAlert);
        }
        Some(AlertEvent {
            at_ms: now_ms - self.started_at_ms,
            budget_seconds: self.level().budget_seconds(),
        })
    }

    /// The user ends artmaking. Elapsed time is rounded to whole seconds and
    /// never exceeds the budget.
    pub fn finish(&mut self, now_ms: u64) -> Result<CompletionRecord, SessionError> {
        self.require_artmaking()?;
        let elapsed_ms = now_ms.saturating_sub(self.started_at_ms);
        let elapsed_seconds = ((elapsed_ms + 500) / 1000).min(self.level().budget_seconds());
        Ok(self.complete(elapsed_seconds, FinishReason::UserFinish))
    }

    fn complete(&mut self, elapsed_seconds: u64, finished_by: FinishReason) -> CompletionRecord {
        let record = CompletionRecord {
            elapsed_seconds,
            cells_colored: self.grid.colored_count() as u32,
            finished_by,
        };
        self.phase = Phase::Completion;
        self.completion = Some(record);
        record
    }

    /// The closing chat box. The session passes through Closure back to the
    /// main menu and becomes read-only.
    pub fn close(&mut self, mood: impl Into<String>) -> Result<(), SessionError> {
        if self.phase != Phase::Completion {
            return Err(SessionError::WrongPhase(self.phase));
        }
        self.phase = Phase::Closure;
        self.mood = Some(mood.into());
        self.phase = Phase::MainMenu;
        Ok(())
    }

    /// Dispatches one event. Used by the service and by log recovery.
    pub fn handle(&mut self, event: &SessionEvent, now_ms: u64) -> Result<Effects, SessionError> {
        let mut effects = Effects::default();
        match event {
            SessionEvent::Paint { cell, color } => {
                let out = self.apply_action(ActionKind::Paint { color: *color }, *cell, now_ms)?;
                effects.action = Some(out.action);
                effects.note = out.note;
            }
            SessionEvent::Erase { cell } => {
                let out = self.apply_action(ActionKind::Erase, *cell, now_ms)?;
                effects.action = Some(out.action);
            }
            SessionEvent::Toggle => {
                effects.reference_visible = Some(self.toggle_reference()?);
            }
            SessionEvent::Tick => {
                effects.alert = self.tick(now_ms);
                if effects.alert.is_some() {
                    effects.completion = self.completion;
                }
            }
            SessionEvent::Finish => {
                effects.completion = Some(self.finish(now_ms)?);
            }
            SessionEvent::Close { mood } => {
                self.close(mood.clone())?;
            }
        }
        Ok(effects)
    }
}
