//! Saved artwork as a binary portable pixmap, one pixel per grid cell.

use breaktimes_core::{Rgb, SessionState};
use serde::Serialize;

/// Colour of non-paintable and unpainted cells.
pub const BACKGROUND: Rgb = Rgb::new(0xFA, 0xF8, 0xF0);

pub const PPM_CONTENT_TYPE: &str = "image/x-portable-pixmap";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtworkExport {
    pub session_id: String,
    pub width: u16,
    pub height: u16,
    /// Row-major.
    pub pixels: Vec<Rgb>,
    pub format: &'static str,
}

impl ArtworkExport {
    pub fn from_session(session: &SessionState) -> Self {
        let scenario = session.scenario();
        let (w, h) = (scenario.width, scenario.height);
        let mut pixels = vec![BACKGROUND; usize::from(w) * usize::from(h)];
        for (cell, color) in session.grid().painted() {
            if let Some(entry) = scenario.palette.get(color) {
                pixels[usize::from(cell.row) * usize::from(w) + usize::from(cell.col)] = entry.rgb;
            }
        }
        Self {
            session_id: session.session_id().to_owned(),
            width: w,
            height: h,
            pixels,
            format: "ppm",
        }
    }

    pub fn pixel(&self, row: u16, col: u16) -> Rgb {
        self.pixels[usize::from(row) * usize::from(self.width) + usize::from(col)]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(&p.to_bytes());
        }
        out
    }

    /// Parses a binary PPM written by [`ArtworkExport::to_ppm`].
    pub fn parse_ppm(bytes: &[u8]) -> Option<(u16, u16, Vec<Rgb>)> {
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while bytes.get(pos)?.is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while !bytes.get(pos)?.is_ascii_whitespace() {
                pos += 1;
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
        }
        pos += 1;
        if fields[0] != "P6" || fields[3] != "255" {
            return None;
        }
        let (w, h): (u16, u16) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
        let data = bytes.get(pos..)?;
        if data.len() != usize::from(w) * usize::from(h) * 3 {
            return None;
        }
        Some((w, h, data.chunks(3).map(|c| Rgb::new(c[0], c[1], c[2])).collect()))
    }
}
