//! Scenario content: loading, validation and the three ways of picking a
//! scene (by break level, at random, or from the full list).

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Component, Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Cell, ColorIndex};
use crate::rng::SplitMix64;

/// Lowest and highest playable pitch (piano range, 69 = A4).
pub const PITCH_RANGE: std::ops::RangeInclusive<u8> = 21..=108;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakLevel {
    Quick,
    Moderate,
    Long,
}

impl BreakLevel {
    pub const ALL: [BreakLevel; 3] = [BreakLevel::Quick, BreakLevel::Moderate, BreakLevel::Long];

    /// Length of the break: 5, 15 or 25 minutes.
    pub const fn budget_seconds(self) -> u64 {
        match self {
            BreakLevel::Quick => 300,
            BreakLevel::Moderate => 900,
            BreakLevel::Long => 1500,
        }
    }

    pub const fn budget_ms(self) -> u64 {
        self.budget_seconds() * 1000
    }

    /// Drawing board side length; longer breaks get bigger boards.
    pub const fn grid_side(self) -> u16 {
        match self {
            BreakLevel::Quick => 12,
            BreakLevel::Moderate => 16,
            BreakLevel::Long => 20,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            BreakLevel::Quick => "quick",
            BreakLevel::Moderate => "moderate",
            BreakLevel::Long => "long",
        }
    }
}

impl fmt::Display for BreakLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BreakLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "quick" => Ok(BreakLevel::Quick),
            "moderate" => Ok(BreakLevel::Moderate),
            "long" => Ok(BreakLevel::Long),
            other => Err(format!("unknown break level {other:?}")),
        }
    }
}

/// sRGB colour, written as `#RRGGBB` in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const fn to_bytes(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

impl FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s
            .strip_prefix('#')
            .filter(|h| h.len() == 6 && h.is_ascii())
            .ok_or_else(|| format!("colour {s:?} is not of the form #RRGGBB"))?;
        let channel = |i: usize| {
            u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| format!("colour {s:?} is not of the form #RRGGBB"))
        };
        Ok(Rgb::new(channel(0)?, channel(2)?, channel(4)?))
    }
}

impl TryFrom<String> for Rgb {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Rgb> for String {
    fn from(c: Rgb) -> Self {
        c.to_string()
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub rgb: Rgb,
    /// Pitch number, 69 = concert A.
    pub note: u8,
}

/// The colours a scene offers, each bound to its own note. An entry's colour
/// index is its position in the list. The eraser is not an entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Palette {
    entries: Vec<PaletteEntry>,
}

impl Palette {
    pub fn new(entries: Vec<PaletteEntry>) -> Result<Self, String> {
        if entries.is_empty() {
            return Err("palette is empty".into());
        }
        if entries.len() > usize::from(u8::MAX) + 1 {
            return Err(format!("palette has {} entries, at most 256 allowed", entries.len()));
        }
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if !PITCH_RANGE.contains(&e.note) {
                return Err(format!("palette entry {i}: note {} outside 21..=108", e.note));
            }
            if !seen.insert(e.note) {
                return Err(format!("palette entry {i}: note {} used twice", e.note));
            }
        }
        Ok(Self { entries })
    }

    /// The diatonic C-major octave from middle C, one note per colour.
    pub fn default_diatonic() -> Self {
        const COLORS: [(u8, u8, u8); 8] = [
            (0xE7, 0x4C, 0x3C),
            (0xF3, 0x9C, 0x12),
            (0xF1, 0xC4, 0x0F),
            (0x27, 0xAE, 0x60),
            (0x1A, 0xBC, 0x9C),
            (0x34, 0x98, 0xDB),
            (0x9B, 0x59, 0xB6),
            (0xFF, 0x8F, 0xB1),
        ];
        const NOTES: [u8; 8] = [60, 62, 64, 65, 67, 69, 71, 72];
        let entries = COLORS
            .iter()
            .zip(NOTES)
            .map(|(&(r, g, b), note)| PaletteEntry { rgb: Rgb::new(r, g, b), note })
            .collect();
        Self { entries }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: ColorIndex) -> Option<&PaletteEntry> {
        self.entries.get(index.index())
    }

    pub fn contains(&self, index: ColorIndex) -> bool {
        index.index() < self.entries.len()
    }

    pub fn entries(&self) -> &[PaletteEntry] {
        &self.entries
    }
}

/// On-disk form of a scenario, one JSON document per file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub id: String,
    pub title: String,
    pub level: BreakLevel,
    pub width: u16,
    pub height: u16,
    pub mask: Vec<Cell>,
    pub palette: Vec<PaletteEntry>,
    pub reference_image: String,
}

/// A validated artmaking scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub id: String,
    pub title: String,
    pub level: BreakLevel,
    pub width: u16,
    pub height: u16,
    pub mask: BTreeSet<Cell>,
    pub palette: Palette,
    /// Path of the reference image, relative to the scenario directory.
    pub reference_image: String,
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self, String> {
        if file.id.trim().is_empty() {
            return Err("id is empty".into());
        }
        if file.title.trim().is_empty() {
            return Err("title is empty".into());
        }
        let side = file.level.grid_side();
        if file.width != side || file.height != side {
            return Err(format!(
                "{} scenarios use a {side}x{side} grid, found {}x{}",
                file.level, file.width, file.height
            ));
        }
        if file.mask.is_empty() {
            return Err("mask is empty".into());
        }
        let mut mask = BTreeSet::new();
        for &cell in &file.mask {
            if cell.row >= file.height || cell.col >= file.width {
                return Err(format!(
                    "mask cell {cell} outside the {}x{} grid",
                    file.width, file.height
                ));
            }
            if !mask.insert(cell) {
                return Err(format!("mask cell {cell} listed twice"));
            }
        }
        let palette = Palette::new(file.palette)?;
        check_relative(&file.reference_image)?;
        Ok(Self {
            id: file.id,
            title: file.title,
            level: file.level,
            width: file.width,
            height: file.height,
            mask,
            palette,
            reference_image: file.reference_image,
        })
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            id: self.id.clone(),
            title: self.title.clone(),
            level: self.level,
            width: self.width,
            height: self.height,
            mask: self.mask.iter().copied().collect(),
            palette: self.palette.entries().to_vec(),
            reference_image: self.reference_image.clone(),
        }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.mask.contains(&cell)
    }
}

fn check_relative(path: &str) -> Result<(), String> {
    if path.is_empty() {
        return Err("reference_image is empty".into());
    }
    let p = Path::new(path);
    if !p.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir)) {
        return Err(format!("reference_image {path:?} must be a relative path inside the scenario directory"));
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read scenario directory {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario {file}: {reason}")]
    MalformedScenario { file: PathBuf, reason: String },
    #[error("scenario id {0:?} is defined more than once")]
    DuplicateId(String),
    #[error("no scenario for the {0} break level")]
    EmptyLevel(BreakLevel),
}

/// All scenarios known to the service, in load order. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    scenarios: Vec<Scenario>,
}

impl Catalog {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self, CatalogError> {
        let mut ids = HashSet::new();
        for s in &scenarios {
            if !ids.insert(s.id.as_str()) {
                return Err(CatalogError::DuplicateId(s.id.clone()));
            }
        }
        for level in BreakLevel::ALL {
            if !scenarios.iter().any(|s| s.level == level) {
                return Err(CatalogError::EmptyLevel(level));
            }
        }
        Ok(Self { scenarios })
    }

    pub fn get(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn list_all(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn select_by_level(&self, level: BreakLevel) -> Vec<&Scenario> {
        self.scenarios.iter().filter(|s| s.level == level).collect()
    }

    /// Uniform pick over the whole catalog: one SplitMix64 draw from `seed`,
    /// reduced modulo the catalog size.
    pub fn select_random(&self, seed: u64) -> &Scenario {
        pick_seeded(&self.scenarios, seed).expect("catalog is never empty")
    }
}

/// Seeded uniform pick from any list; `None` only for an empty list.
pub fn pick_seeded<T>(items: &[T], seed: u64) -> Option<&T> {
    if items.is_empty() {
        return None;
    }
    let draw = SplitMix64::new(seed).next_u64();
    items.get((draw % items.len() as u64) as usize)
}

/// Loads every `*.json` file in `dir`, in file-name order.
pub fn load_catalog(dir: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let dir = dir.as_ref();
    let io_err = |source| CatalogError::Io { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();

    let mut scenarios = Vec::with_capacity(files.len());
    for file in files {
        let malformed = |reason: String| CatalogError::MalformedScenario { file: file.clone(), reason };
        let text = fs::read_to_string(&file).map_err(|e| malformed(e.to_string()))?;
        let raw: ScenarioFile = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
        let scenario = Scenario::from_file(raw).map_err(malformed)?;
        if !dir.join(&scenario.reference_image).is_file() {
            return Err(malformed(format!(
                "reference image {} not found",
                scenario.reference_image
            )));
        }
        scenarios.push(scenario);
    }
    Catalog::new(scenarios)
}
