//! Reference implementations used to check the engine from the outside.
//!
//! Each oracle is written directly from the behavioural rules, with no code
//! shared with the crate under test beyond its plain data types.

use std::collections::{BTreeSet, HashMap};

use breaktimes_core::{ActionKind, Cell, ColorIndex, PaintAction, Phase};

/// Stress score by brute force: raw item sum, doubled.
pub fn stress_score(items: &[u8; 7]) -> u32 {
    let mut raw = 0u32;
    for &v in items {
        raw += u32::from(v);
    }
    raw * 2
}

/// Band name for a doubled score, straight from the cut-off table.
pub fn stress_band(score: u32) -> &'static str {
    const TABLE: [(u32, u32, &str); 5] = [
        (0, 14, "normal"),
        (15, 18, "mild"),
        (19, 25, "moderate"),
        (26, 33, "severe"),
        (34, 42, "extremely_severe"),
    ];
    let hits: Vec<&str> = TABLE.iter().filter(|(lo, hi, _)| (*lo..=*hi).contains(&score)).map(|t| t.2).collect();
    assert_eq!(hits.len(), 1, "score {score} must fall in exactly one band");
    hits[0]
}

/// Every answer vector of the seven-item questionnaire, 4^7 of them.
pub fn all_item_vectors() -> impl Iterator<Item = [u8; 7]> {
    (0u32..4u32.pow(7)).map(|mut n| {
        let mut v = [0u8; 7];
        for slot in &mut v {
            *slot = (n % 4) as u8;
            n /= 4;
        }
        v
    })
}

/// Painted cells obtained by replaying a log: a paint sets the colour, an
/// erase clears it, later actions win.
pub fn fold_log<'a>(actions: impl IntoIterator<Item = &'a PaintAction>) -> HashMap<Cell, ColorIndex> {
    let mut grid = HashMap::new();
    for a in actions {
        match a.kind {
            ActionKind::Paint { color } => {
                grid.insert(a.cell, color);
            }
            ActionKind::Erase => {
                grid.remove(&a.cell);
            }
        }
    }
    grid
}

pub fn phase_rank(phase: Phase) -> u8 {
    match phase {
        Phase::Artmaking => 0,
        Phase::Completion => 1,
        Phase::Closure => 2,
        Phase::MainMenu => 3,
    }
}

/// Equal-temperament frequency computed from the octave relation alone:
/// A4 is 440 Hz and each octave doubles.
pub fn reference_frequency(pitch: u8) -> f64 {
    let offset = f64::from(pitch) - 69.0;
    440.0 * 2f64.powf(offset / 12.0)
}

/// Small deterministic generator for test inputs (xorshift64*), independent
/// of the one the catalog uses for scenario picks.
#[derive(Debug, Clone)]
pub struct InputRng(u64);

impl InputRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.below(100) < percent
    }

    /// A random non-empty mask inside a `side` x `side` grid.
    pub fn mask(&mut self, side: u16, density_percent: u64) -> BTreeSet<Cell> {
        let mut mask: BTreeSet<Cell> = (0..side)
            .flat_map(|r| (0..side).map(move |c| Cell::new(r, c)))
            .filter(|_| self.chance(density_percent))
            .collect();
        if mask.is_empty() {
            mask.insert(Cell::new(0, 0));
        }
        mask
    }
}
