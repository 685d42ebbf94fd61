//! Append-only line journals. A line is durable once `append` returns.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

pub trait Journal: Send {
    /// Writes one line (newline added here) and makes it durable.
    fn append(&mut self, line: &[u8]) -> io::Result<()>;
    fn sync(&mut self) -> io::Result<()>;
}

pub struct FileJournal {
    file: File,
}

impl FileJournal {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file })
    }
}

impl Journal for FileJournal {
    fn append(&mut self, line: &[u8]) -> io::Result<()> {
        let mut buf = Vec::with_capacity(line.len() + 1);
        buf.extend_from_slice(line);
        buf.push(b'\n');
        self.file.write_all(&buf)?;
        self.file.sync_data()
    }

    fn sync(&mut self) -> io::Result<()> {
        self.file.sync_all()
    }
}

/// Opens the journal for a path. Swappable so tests can inject failures.
pub type JournalOpener = Arc<dyn Fn(&Path) -> io::Result<Box<dyn Journal>> + Send + Sync>;

pub fn file_opener() -> JournalOpener {
    Arc::new(|path| Ok(Box::new(FileJournal::open(path)?) as Box<dyn Journal>))
}

/// Reads complete lines from a journal. A trailing partial line, left by a
/// crash mid-write and therefore never acknowledged, is cut off the file.
pub fn read_lines(path: &Path) -> io::Result<Vec<String>> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if complete < bytes.len() {
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(complete as u64)?;
        f.sync_all()?;
    }
    let text = String::from_utf8_lossy(&bytes[..complete]);
    Ok(text.lines().filter(|l| !l.trim().is_empty()).map(str::to_owned).collect())
}
