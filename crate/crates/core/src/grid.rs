use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A grid position. Serialized as a `[row, col]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(u16, u16)", into = "(u16, u16)")]
pub struct Cell {
    pub row: u16,
    pub col: u16,
}

impl Cell {
    pub const fn new(row: u16, col: u16) -> Self {
        Self { row, col }
    }
}

impl From<(u16, u16)> for Cell {
    fn from((row, col): (u16, u16)) -> Self {
        Self { row, col }
    }
}

impl From<Cell> for (u16, u16) {
    fn from(cell: Cell) -> Self {
        (cell.row, cell.col)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Zero-based position in a scenario palette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorIndex(pub u8);

impl ColorIndex {
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ColorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Colour state of every paintable cell. Cells outside the mask do not exist
/// here at all; `None` means the cell is still empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GridState {
    cells: BTreeMap<Cell, Option<ColorIndex>>,
}

impl GridState {
    pub fn empty<'a>(mask: impl IntoIterator<Item = &'a Cell>) -> Self {
        Self {
            cells: mask.into_iter().map(|&c| (c, None)).collect(),
        }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.contains_key(&cell)
    }

    /// `None` if the cell is not paintable, `Some(None)` if it is empty.
    pub fn get(&self, cell: Cell) -> Option<Option<ColorIndex>> {
        self.cells.get(&cell).copied()
    }

    /// Sets or clears a cell. Returns false, leaving the grid untouched, when
    /// the cell is outside the mask.
    pub fn set(&mut self, cell: Cell, color: Option<ColorIndex>) -> bool {
        match self.cells.get_mut(&cell) {
            Some(slot) => {
                *slot = color;
                true
            }
            None => false,
        }
    }

    pub fn colored_count(&self) -> usize {
        self.cells.values().filter(|c| c.is_some()).count()
    }

    pub fn mask_len(&self) -> usize {
        self.cells.len()
    }

    pub fn mask(&self) -> BTreeSet<Cell> {
        self.cells.keys().copied().collect()
    }

    /// Painted cells in row-major order.
    pub fn painted(&self) -> impl Iterator<Item = (Cell, ColorIndex)> + '_ {
        self.cells.iter().filter_map(|(&cell, &c)| c.map(|c| (cell, c)))
    }
}
