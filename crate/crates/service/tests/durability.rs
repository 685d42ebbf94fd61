mod common;

use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use breaktimes_core::{load_catalog, Catalog, Cell, ColorIndex, Phase, SessionEvent, SessionOptions};
use breaktimes_service::journal::{FileJournal, Journal, JournalOpener};
use breaktimes_service::{LogRecord, ManualClock, ServiceError, SessionStore};
use common::{scenario_dir, T0};

fn catalog() -> Arc<Catalog> {
    Arc::new(load_catalog(scenario_dir()).unwrap())
}

fn open(dir: &Path, clock: &ManualClock) -> SessionStore {
    SessionStore::open(dir, catalog(), Arc::new(clock.clone()), SessionOptions::default()).unwrap()
}

fn mask(store: &SessionStore, scenario: &str) -> Vec<Cell> {
    store.catalog().get(scenario).unwrap().mask.iter().copied().collect()
}

fn paint(cell: Cell, color: u8) -> SessionEvent {
    SessionEvent::Paint { cell, color: ColorIndex(color) }
}

fn events_path(dir: &Path, id: &str) -> std::path::PathBuf {
    dir.join("sessions").join(id).join("events.jsonl")
}

fn line_count(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn restart_mid_session_rebuilds_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let store = open(dir.path(), &clock);
    let id = store.create("rocket_in_space").unwrap().session_id;
    let cells = mask(&store, "rocket_in_space");
    for (i, cell) in cells.iter().cycle().take(120).enumerate() {
        clock.advance(700);
        let event = if i % 5 == 4 { SessionEvent::Erase { cell: *cell } } else { paint(*cell, (i % 8) as u8) };
        store.record_event(&id, event).unwrap();
        if i == 60 {
            store.record_event(&id, SessionEvent::Toggle).unwrap();
        }
    }
    let before = store.snapshot(&id).unwrap();
    drop(store);

    let reopened = open(dir.path(), &clock);
    assert_eq!(reopened.snapshot(&id).unwrap(), before);
    assert_eq!(reopened.journal_lines(&id).unwrap(), 121);

    // The recovered session keeps accepting events where it left off.
    clock.advance(1_000);
    let ack = reopened.record_event(&id, paint(cells[0], 2)).unwrap();
    assert_eq!(ack.action.unwrap().seq, 120);
    assert_eq!(ack.journal_lines, 122);
}

#[test]
fn closed_sessions_recover_with_their_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let store = open(dir.path(), &clock);
    let id = store.create("cat_in_the_park").unwrap().session_id;
    let cells = mask(&store, "cat_in_the_park");
    for cell in &cells[..10] {
        store.record_event(&id, paint(*cell, 1)).unwrap();
    }
    clock.advance(30_000);
    store.record_event(&id, SessionEvent::Finish).unwrap();
    store.close(&id, "").unwrap();
    let stored = store.stored(&id).unwrap();
    let snapshot = stored.terminal_snapshot.clone().unwrap();
    assert_eq!(snapshot.completion.cells_colored, 10);
    assert_eq!(snapshot.score.points, 100 + 270);
    assert_eq!(snapshot.mood, "");
    let before = store.snapshot(&id).unwrap();
    drop(store);

    let reopened = open(dir.path(), &clock);
    let after = reopened.snapshot(&id).unwrap();
    assert_eq!(after, before);
    assert_eq!(after.phase(), Phase::MainMenu);
    assert_eq!(reopened.stored(&id).unwrap(), stored);
    assert!(matches!(reopened.record_event(&id, SessionEvent::Tick), Err(ServiceError::Engine(_))));
}

#[test]
fn missing_snapshot_is_rebuilt_from_the_journal() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let store = open(dir.path(), &clock);
    let id = store.create("cat_in_the_park").unwrap().session_id;
    store.record_event(&id, SessionEvent::Finish).unwrap();
    store.close(&id, "tired").unwrap();
    let expected = store.stored(&id).unwrap().terminal_snapshot;
    drop(store);

    std::fs::remove_file(dir.path().join("sessions").join(&id).join("snapshot.json")).unwrap();
    let reopened = open(dir.path(), &clock);
    assert_eq!(reopened.stored(&id).unwrap().terminal_snapshot, expected);
}

#[test]
fn torn_final_line_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let store = open(dir.path(), &clock);
    let id = store.create("cat_in_the_park").unwrap().session_id;
    let cells = mask(&store, "cat_in_the_park");
    for cell in &cells[..5] {
        clock.advance(100);
        store.record_event(&id, paint(*cell, 0)).unwrap();
    }
    let before = store.snapshot(&id).unwrap();
    drop(store);

    let path = events_path(dir.path(), &id);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.extend_from_slice(br#"{"record":"action","seq":5,"at_ms":"#);
    std::fs::write(&path, &bytes).unwrap();

    let reopened = open(dir.path(), &clock);
    assert_eq!(reopened.snapshot(&id).unwrap(), before);
    assert_eq!(line_count(&path), 5);
    assert!(std::fs::read(&path).unwrap().ends_with(b"\n"));
}

#[test]
fn corrupt_journal_skips_only_that_session() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let store = open(dir.path(), &clock);
    let good = store.create("cat_in_the_park").unwrap().session_id;
    let bad = store.create("cat_in_the_park").unwrap().session_id;
    let cell = mask(&store, "cat_in_the_park")[0];
    store.record_event(&bad, paint(cell, 0)).unwrap();
    drop(store);

    std::fs::write(events_path(dir.path(), &bad), b"not json\n").unwrap();
    let reopened = open(dir.path(), &clock);
    assert_eq!(reopened.session_ids(), vec![good]);
}

/// Journal that accepts a fixed number of appends, then fails.
struct FlakyJournal {
    inner: FileJournal,
    budget: Arc<AtomicUsize>,
}

impl Journal for FlakyJournal {
    fn append(&mut self, line: &[u8]) -> io::Result<()> {
        if self.budget.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1)).is_err() {
            return Err(io::Error::other("disk full"));
        }
        self.inner.append(line)
    }

    fn sync(&mut self) -> io::Result<()> {
        self.inner.sync()
    }
}

#[test]
fn failed_append_is_not_acknowledged_or_applied() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let budget = Arc::new(AtomicUsize::new(3));
    let opener: JournalOpener = {
        let budget = budget.clone();
        Arc::new(move |path: &Path| {
            Ok(Box::new(FlakyJournal { inner: FileJournal::open(path)?, budget: budget.clone() }) as Box<dyn Journal>)
        })
    };
    let store =
        SessionStore::open_with(dir.path(), catalog(), Arc::new(clock.clone()), SessionOptions::default(), opener)
            .unwrap();
    let id = store.create("cat_in_the_park").unwrap().session_id;
    let cells = mask(&store, "cat_in_the_park");
    for cell in &cells[..3] {
        store.record_event(&id, paint(*cell, 4)).unwrap();
    }
    let before = store.snapshot(&id).unwrap();

    let err = store.record_event(&id, paint(cells[3], 4)).unwrap_err();
    assert_eq!(err.code(), "storage_failure");
    assert_eq!(store.snapshot(&id).unwrap(), before);
    let err = store.record_event(&id, SessionEvent::Finish).unwrap_err();
    assert_eq!(err.code(), "storage_failure");
    assert_eq!(store.snapshot(&id).unwrap().phase(), Phase::Artmaking);
    assert_eq!(store.journal_lines(&id).unwrap(), 3);

    // Once the disk recovers the next event takes the next sequence number.
    budget.store(10, Ordering::SeqCst);
    let ack = store.record_event(&id, paint(cells[3], 4)).unwrap();
    assert_eq!(ack.action.unwrap().seq, 3);
    drop(store);
    assert_eq!(open(dir.path(), &clock).snapshot(&id).unwrap().log().len(), 4);
}

#[test]
fn thousand_acknowledged_events_make_thousand_lines() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let store = open(dir.path(), &clock);
    let id = store.create("fish_under_the_sea").unwrap().session_id;
    let cells = mask(&store, "fish_under_the_sea");
    let mut acked = 0u64;
    for i in 0..1000usize {
        clock.advance(1);
        let cell = cells[i * 7 % cells.len()];
        let event = match i % 10 {
            3 => SessionEvent::Erase { cell },
            7 => SessionEvent::Toggle,
            _ => paint(cell, (i % 8) as u8),
        };
        let ack = store.record_event(&id, event).unwrap();
        assert!(ack.logged);
        acked += 1;
        assert_eq!(ack.journal_lines, acked);
    }
    assert_eq!(line_count(&events_path(dir.path(), &id)), 1000);
    for line in std::fs::read_to_string(events_path(dir.path(), &id)).unwrap().lines() {
        serde_json::from_str::<LogRecord>(line).unwrap();
    }
}

#[test]
fn concurrent_events_on_one_session_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(T0);
    let store = Arc::new(open(dir.path(), &clock));
    let id = store.create("fish_under_the_sea").unwrap().session_id;
    let cells = mask(&store, "fish_under_the_sea");

    std::thread::scope(|scope| {
        for t in 0..8usize {
            let (store, id, cells, clock) = (store.clone(), id.clone(), cells.clone(), clock.clone());
            scope.spawn(move || {
                for i in 0..50usize {
                    clock.advance(3);
                    store.record_event(&id, paint(cells[(t * 50 + i) % cells.len()], t as u8)).unwrap();
                }
            });
        }
    });

    let state = store.snapshot(&id).unwrap();
    let seqs: Vec<u64> = state.log().iter().map(|a| a.seq).collect();
    assert_eq!(seqs, (0..400).collect::<Vec<_>>());
    assert!(state.log().windows(2).all(|w| w[0].at_ms <= w[1].at_ms));
    assert_eq!(line_count(&events_path(dir.path(), &id)), 400);
    drop(store);
    assert_eq!(open(dir.path(), &clock).snapshot(&id).unwrap(), state);
}
