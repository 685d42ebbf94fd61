//! Workloads shared by the benchmarks.

use std::sync::Arc;

use breaktimes_core::rng::SplitMix64;
use breaktimes_core::{ActionKind, BreakLevel, Cell, ColorIndex, Palette, Scenario, SessionState};

/// A long-level scenario whose mask is the whole 20 x 20 grid.
pub fn full_scenario() -> Arc<Scenario> {
    let side = BreakLevel::Long.grid_side();
    Arc::new(Scenario {
        id: "bench".into(),
        title: "Bench".into(),
        level: BreakLevel::Long,
        width: side,
        height: side,
        mask: (0..side).flat_map(|r| (0..side).map(move |c| Cell::new(r, c))).collect(),
        palette: Palette::default_diatonic(),
        reference_image: "bench.ppm".into(),
    })
}

/// Pseudo-random gestures: roughly one erase in four.
pub fn gestures(n: usize, seed: u64) -> Vec<(ActionKind, Cell)> {
    let side = u64::from(BreakLevel::Long.grid_side());
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let x = rng.next_u64();
            let cell = Cell::new((x % side) as u16, ((x >> 8) % side) as u16);
            let kind = if (x >> 16).is_multiple_of(4) {
                ActionKind::Erase
            } else {
                ActionKind::Paint { color: ColorIndex(((x >> 20) % 8) as u8) }
            };
            (kind, cell)
        })
        .collect()
}

/// Runs `gestures` through a fresh session, one per millisecond.
pub fn play(scenario: &Arc<Scenario>, gestures: &[(ActionKind, Cell)]) -> SessionState {
    let mut s = SessionState::start("bench", scenario.clone(), 0);
    for (i, (kind, cell)) in gestures.iter().enumerate() {
        s.apply_action(*kind, *cell, i as u64).expect("gestures stay inside the mask and budget");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_is_valid() {
        let s = play(&full_scenario(), &gestures(1_000, 1));
        assert_eq!(s.log().len(), 1_000);
    }
}
