//! Durable session store.
//!
//! On-disk layout, one directory per session under `<data_dir>/sessions/`:
//!
//! ```text
//! <id>/session.json    header: scenario, start time, options
//! <id>/events.jsonl    one LogRecord per line, append-only
//! <id>/snapshot.json   completion, score and mood, written at close
//! <id>/artwork.ppm     last exported artwork
//! ```
//!
//! Mutations on one session are serialized by that session's mutex. Each
//! mutation runs the engine on a copy of the state, appends the journal line,
//! and only then commits the copy and acknowledges.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use breaktimes_core::{
    build_replay, compute_score, message_for, AlertEvent, Catalog, CompletionRecord, Effects, PaintAction,
    Phase, ReplayScript, Score, SessionError, SessionEvent, SessionOptions, SessionState,
};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::artwork::ArtworkExport;
use crate::clock::Clock;
use crate::error::ServiceError;
use crate::journal::{file_opener, read_lines, Journal, JournalOpener};

const HEADER_FILE: &str = "session.json";
const EVENTS_FILE: &str = "events.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";
const ARTWORK_FILE: &str = "artwork.ppm";

/// One journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Action(PaintAction),
    Toggle { now_ms: u64 },
    Tick { now_ms: u64 },
    Finish { now_ms: u64 },
    Close { mood: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SessionHeader {
    session_id: String,
    scenario_id: String,
    created_at: DateTime<Utc>,
    started_at_ms: u64,
    auto_finish_on_alert: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalSnapshot {
    pub completion: CompletionRecord,
    pub score: Score,
    pub mood: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoredSession {
    pub session_id: String,
    pub scenario_id: String,
    pub created_at: DateTime<Utc>,
    pub event_log_path: PathBuf,
    pub terminal_snapshot: Option<TerminalSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub scenario_id: String,
    pub started_at_ms: u64,
    pub deadline_ms: u64,
    pub budget_seconds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NotePayload {
    pub pitch: u8,
    pub frequency_hz: f64,
    pub duration_ms: u32,
    pub velocity: f32,
    pub onset_ms: u64,
    pub source_seq: u64,
}

/// Reply to an accepted event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventAck {
    pub session_id: String,
    pub phase: Phase,
    /// Whether the event was journaled. Ticks with nothing to do are not.
    pub logged: bool,
    pub journal_lines: u64,
    pub action: Option<PaintAction>,
    pub note: Option<NotePayload>,
    pub alert: Option<AlertEvent>,
    pub completion: Option<CompletionRecord>,
    pub score: Option<Score>,
    pub message: Option<&'static str>,
    pub reference_visible: bool,
    pub remaining_ms: u64,
}

struct Slot {
    state: SessionState,
    dir: PathBuf,
    journal: Option<Box<dyn Journal>>,
    journal_lines: u64,
}

type SlotRef = Arc<Mutex<Slot>>;

pub struct SessionStore {
    root: PathBuf,
    catalog: Arc<Catalog>,
    clock: Arc<dyn Clock>,
    opener: JournalOpener,
    options: SessionOptions,
    sessions: RwLock<HashMap<String, SlotRef>>,
}

fn lock(slot: &SlotRef) -> MutexGuard<'_, Slot> {
    // Slots are only replaced wholesale after a successful append, so a
    // poisoned lock still guards a consistent state.
    slot.lock().unwrap_or_else(|e| e.into_inner())
}

fn write_json_durably(path: &Path, value: &impl Serialize) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?)?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}

impl SessionStore {
    /// Opens the store under `<data_dir>/sessions` and recovers every session
    /// found there.
    pub fn open(
        data_dir: &Path,
        catalog: Arc<Catalog>,
        clock: Arc<dyn Clock>,
        options: SessionOptions,
    ) -> Result<Self, ServiceError> {
        Self::open_with(data_dir, catalog, clock, options, file_opener())
    }

    pub fn open_with(
        data_dir: &Path,
        catalog: Arc<Catalog>,
        clock: Arc<dyn Clock>,
        options: SessionOptions,
        opener: JournalOpener,
    ) -> Result<Self, ServiceError> {
        let root = data_dir.join("sessions");
        fs::create_dir_all(&root).map_err(|e| ServiceError::storage("creating the sessions directory", e))?;
        let store = Self {
            root,
            catalog,
            clock,
            opener,
            options,
            sessions: RwLock::new(HashMap::new()),
        };
        store.recover_all()?;
        Ok(store)
    }

    fn recover_all(&self) -> Result<(), ServiceError> {
        let entries = fs::read_dir(&self.root).map_err(|e| ServiceError::storage("listing sessions", e))?;
        let mut recovered = HashMap::new();
        for entry in entries {
            let dir = entry.map_err(|e| ServiceError::storage("listing sessions", e))?.path();
            if !dir.join(HEADER_FILE).is_file() {
                continue;
            }
            match self.recover_session(&dir) {
                Ok(slot) => {
                    recovered.insert(slot.state.session_id().to_owned(), Arc::new(Mutex::new(slot)));
                }
                Err(e) => tracing::warn!(dir = %dir.display(), error = %e, "skipping unrecoverable session"),
            }
        }
        tracing::info!(count = recovered.len(), "recovered sessions");
        *self.sessions.write().unwrap_or_else(|e| e.into_inner()) = recovered;
        Ok(())
    }

    /// Rebuilds a session by folding its journal over a fresh start.
    fn recover_session(&self, dir: &Path) -> Result<Slot, ServiceError> {
        let corrupt = |reason: String| ServiceError::CorruptJournal { path: dir.to_path_buf(), reason };
        let header_text = fs::read_to_string(dir.join(HEADER_FILE))
            .map_err(|e| ServiceError::storage("reading a session header", e))?;
        let header: SessionHeader = serde_json::from_str(&header_text).map_err(|e| corrupt(e.to_string()))?;
        let scenario = self
            .catalog
            .get(&header.scenario_id)
            .ok_or_else(|| ServiceError::UnknownScenario(header.scenario_id.clone()))?;
        let options = SessionOptions { auto_finish_on_alert: header.auto_finish_on_alert };
        let mut state =
            SessionState::start_with(header.session_id.clone(), Arc::new(scenario.clone()), header.started_at_ms, options);

        let events_path = dir.join(EVENTS_FILE);
        let lines = read_lines(&events_path).map_err(|e| ServiceError::storage("reading a journal", e))?;
        for (n, line) in lines.iter().enumerate() {
            let record: LogRecord =
                serde_json::from_str(line).map_err(|e| corrupt(format!("line {}: {e}", n + 1)))?;
            replay_record(&mut state, &record).map_err(|reason| corrupt(format!("line {}: {reason}", n + 1)))?;
        }

        let snapshot_path = dir.join(SNAPSHOT_FILE);
        if state.is_terminal() {
            let expected = self.snapshot_of(&state)?;
            match fs::read_to_string(&snapshot_path) {
                Ok(text) => {
                    let stored: TerminalSnapshot = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
                    if stored != expected {
                        return Err(corrupt("snapshot disagrees with the journal".into()));
                    }
                }
                Err(_) => write_json_durably(&snapshot_path, &expected)
                    .map_err(|e| ServiceError::storage("rewriting a snapshot", e))?,
            }
        }

        let journal = if state.is_terminal() {
            None
        } else {
            Some((self.opener)(&events_path).map_err(|e| ServiceError::storage("opening a journal", e))?)
        };
        Ok(Slot { state, dir: dir.to_path_buf(), journal, journal_lines: lines.len() as u64 })
    }

    fn snapshot_of(&self, state: &SessionState) -> Result<TerminalSnapshot, ServiceError> {
        let completion = *state
            .completion()
            .ok_or_else(|| ServiceError::NotCompleted(state.session_id().to_owned()))?;
        Ok(TerminalSnapshot {
            completion,
            score: compute_score(&completion, state.scenario())?,
            mood: state.mood().unwrap_or_default().to_owned(),
        })
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    fn slot(&self, session_id: &str) -> Result<SlotRef, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_owned()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Starts a session on a scenario; the header is on disk before this
    /// returns.
    pub fn create(&self, scenario_id: &str) -> Result<SessionSummary, ServiceError> {
        let scenario = self
            .catalog
            .get(scenario_id)
            .ok_or_else(|| ServiceError::UnknownScenario(scenario_id.to_owned()))?;
        let session_id = uuid::Uuid::new_v4().simple().to_string();
        let now = self.clock.now_ms();
        let state = SessionState::start_with(session_id.clone(), Arc::new(scenario.clone()), now, self.options);

        let dir = self.root.join(&session_id);
        fs::create_dir_all(&dir).map_err(|e| ServiceError::storage("creating a session directory", e))?;
        let header = SessionHeader {
            session_id: session_id.clone(),
            scenario_id: scenario.id.clone(),
            created_at: Utc::now(),
            started_at_ms: now,
            auto_finish_on_alert: self.options.auto_finish_on_alert,
        };
        write_json_durably(&dir.join(HEADER_FILE), &header)
            .map_err(|e| ServiceError::storage("writing a session header", e))?;
        let journal =
            (self.opener)(&dir.join(EVENTS_FILE)).map_err(|e| ServiceError::storage("opening a journal", e))?;

        let summary = SessionSummary {
            session_id: session_id.clone(),
            scenario_id: scenario.id.clone(),
            started_at_ms: now,
            deadline_ms: state.deadline_ms(),
            budget_seconds: scenario.level.budget_seconds(),
        };
        let slot = Slot { state, dir, journal: Some(journal), journal_lines: 0 };
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(session_id, Arc::new(Mutex::new(slot)));
        Ok(summary)
    }

    /// Validates and applies one event, journaling it before acknowledging.
    pub fn record_event(&self, session_id: &str, event: SessionEvent) -> Result<EventAck, ServiceError> {
        if let SessionEvent::Close { mood } = event {
            return self.close(session_id, &mood);
        }
        let slot_ref = self.slot(session_id)?;
        let mut slot = lock(&slot_ref);
        if slot.state.is_terminal() {
            return Err(SessionError::WrongPhase(slot.state.phase()).into());
        }
        let now = self.clock.now_ms();
        let mut next = slot.state.clone();
        let effects = next.handle(&event, now)?;

        let record = match (&event, &effects) {
            (_, Effects { action: Some(a), .. }) => Some(LogRecord::Action(*a)),
            (SessionEvent::Toggle, _) => Some(LogRecord::Toggle { now_ms: now }),
            (SessionEvent::Finish, _) => Some(LogRecord::Finish { now_ms: now }),
            (SessionEvent::Tick, fx) if fx.changed_state() => Some(LogRecord::Tick { now_ms: now }),
            _ => None,
        };
        let logged = record.is_some();
        if let Some(record) = record {
            append(&mut slot, &record)?;
        }
        slot.state = next;
        self.ack(&slot, effects, logged, now)
    }

    /// The closing mood prompt. Journals the mood, writes the terminal
    /// snapshot and releases the journal.
    pub fn close(&self, session_id: &str, mood: &str) -> Result<EventAck, ServiceError> {
        let slot_ref = self.slot(session_id)?;
        let mut slot = lock(&slot_ref);
        let mut next = slot.state.clone();
        next.close(mood)?;
        append(&mut slot, &LogRecord::Close { mood: mood.to_owned() })?;
        let snapshot = self.snapshot_of(&next)?;
        if let Err(e) = write_json_durably(&slot.dir.join(SNAPSHOT_FILE), &snapshot) {
            // The journal already holds the close; recovery rebuilds the snapshot.
            tracing::warn!(session_id, error = %e, "snapshot write failed");
        }
        slot.state = next;
        if let Some(mut journal) = slot.journal.take() {
            let _ = journal.sync();
        }
        let now = self.clock.now_ms();
        self.ack(&slot, Effects::default(), true, now)
    }

    fn ack(&self, slot: &Slot, effects: Effects, logged: bool, now: u64) -> Result<EventAck, ServiceError> {
        let state = &slot.state;
        let score = effects.completion.map(|c| compute_score(&c, state.scenario())).transpose()?;
        Ok(EventAck {
            session_id: state.session_id().to_owned(),
            phase: state.phase(),
            logged,
            journal_lines: slot.journal_lines,
            action: effects.action,
            note: effects.note.map(|n| NotePayload {
                pitch: n.note.pitch,
                frequency_hz: n.note.frequency_hz(),
                duration_ms: n.note.duration_ms,
                velocity: n.note.velocity,
                onset_ms: n.onset_ms,
                source_seq: n.source_seq,
            }),
            alert: effects.alert,
            completion: effects.completion,
            message: score.as_ref().map(message_for),
            score,
            reference_visible: state.reference_visible(),
            remaining_ms: state.remaining_ms(now),
        })
    }

    /// Runs `f` on a consistent view of the session.
    pub fn with_session<R>(&self, session_id: &str, f: impl FnOnce(&SessionState) -> R) -> Result<R, ServiceError> {
        let slot_ref = self.slot(session_id)?;
        let slot = lock(&slot_ref);
        Ok(f(&slot.state))
    }

    pub fn snapshot(&self, session_id: &str) -> Result<SessionState, ServiceError> {
        self.with_session(session_id, SessionState::clone)
    }

    pub fn journal_lines(&self, session_id: &str) -> Result<u64, ServiceError> {
        let slot_ref = self.slot(session_id)?;
        let slot = lock(&slot_ref);
        Ok(slot.journal_lines)
    }

    pub fn replay(&self, session_id: &str) -> Result<ReplayScript, ServiceError> {
        let state = self.snapshot(session_id)?;
        Ok(build_replay(&state, &state.scenario().palette)?)
    }

    /// Renders the artwork, saves it next to the journal and returns it.
    pub fn export_artwork(&self, session_id: &str) -> Result<(ArtworkExport, PathBuf), ServiceError> {
        let slot_ref = self.slot(session_id)?;
        let slot = lock(&slot_ref);
        if slot.state.completion().is_none() {
            return Err(ServiceError::NotCompleted(session_id.to_owned()));
        }
        let art = ArtworkExport::from_session(&slot.state);
        let path = slot.dir.join(ARTWORK_FILE);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, art.to_ppm())
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| ServiceError::storage("writing artwork", e))?;
        Ok((art, path))
    }

    pub fn stored(&self, session_id: &str) -> Result<StoredSession, ServiceError> {
        let slot_ref = self.slot(session_id)?;
        let slot = lock(&slot_ref);
        let header_text = fs::read_to_string(slot.dir.join(HEADER_FILE))
            .map_err(|e| ServiceError::storage("reading a session header", e))?;
        let header: SessionHeader = serde_json::from_str(&header_text).map_err(|e| ServiceError::CorruptJournal {
            path: slot.dir.clone(),
            reason: e.to_string(),
        })?;
        let terminal_snapshot = fs::read_to_string(slot.dir.join(SNAPSHOT_FILE))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok());
        Ok(StoredSession {
            session_id: header.session_id,
            scenario_id: header.scenario_id,
            created_at: header.created_at,
            event_log_path: slot.dir.join(EVENTS_FILE),
            terminal_snapshot,
        })
    }

    /// Forces every open journal to disk. Called on shutdown.
    pub fn flush_all(&self) -> Result<(), ServiceError> {
        let slots: Vec<SlotRef> = self.sessions.read().unwrap_or_else(|e| e.into_inner()).values().cloned().collect();
        for slot_ref in slots {
            let mut slot = lock(&slot_ref);
            if let Some(journal) = slot.journal.as_mut() {
                journal.sync().map_err(|e| ServiceError::storage("flushing a journal", e))?;
            }
        }
        Ok(())
    }
}

fn append(slot: &mut Slot, record: &LogRecord) -> Result<(), ServiceError> {
    let line = serde_json::to_vec(record).expect("log records always serialize");
    let journal = slot
        .journal
        .as_mut()
        .ok_or_else(|| ServiceError::Engine(SessionError::WrongPhase(slot.state.phase())))?;
    journal
        .append(&line)
        .map_err(|e| ServiceError::storage("appending to a journal", e))?;
    slot.journal_lines += 1;
    Ok(())
}

fn replay_record(state: &mut SessionState, record: &LogRecord) -> Result<(), String> {
    match record {
        LogRecord::Action(action) => {
            let event = match action.kind {
                breaktimes_core::ActionKind::Paint { color } => SessionEvent::Paint { cell: action.cell, color },
                breaktimes_core::ActionKind::Erase => SessionEvent::Erase { cell: action.cell },
            };
            let fx = state
                .handle(&event, state.started_at_ms() + action.at_ms)
                .map_err(|e| e.to_string())?;
            if fx.action.as_ref() != Some(action) {
                return Err(format!("action {} does not reproduce", action.seq));
            }
        }
        LogRecord::Toggle { now_ms } => {
            state.handle(&SessionEvent::Toggle, *now_ms).map_err(|e| e.to_string())?;
        }
        LogRecord::Tick { now_ms } => {
            let fx = state.handle(&SessionEvent::Tick, *now_ms).map_err(|e| e.to_string())?;
            if fx.alert.is_none() {
                return Err("logged tick does not fire the alert".into());
            }
        }
        LogRecord::Finish { now_ms } => {
            state.handle(&SessionEvent::Finish, *now_ms).map_err(|e| e.to_string())?;
        }
        LogRecord::Close { mood } => state.close(mood.clone()).map_err(|e| e.to_string())?,
    }
    Ok(())
}
