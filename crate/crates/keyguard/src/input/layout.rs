//! Soft-keyboard geometry: maps touch coordinates to key codes. Each key
//! occupies the half-open unit cell [col, col+1) x [row, row+1).

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::input::{KeyCode, PRINTABLE_MAX, PRINTABLE_MIN};

#[derive(Debug, Clone)]
pub struct KeyboardLayout {
    rows: Vec<String>,
}

impl KeyboardLayout {
    /// The fixed 3-row lowercase grid used by the standard scenarios.
    pub fn qwerty() -> KeyboardLayout {
        KeyboardLayout {
            rows: vec![
                "qwertyuiop".to_string(),
                "asdfghjkl".to_string(),
                "zxcvbnm".to_string(),
            ],
        }
    }

    pub fn new(rows: Vec<String>) -> Result<KeyboardLayout> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            for b in row.bytes() {
                if !(PRINTABLE_MIN..=PRINTABLE_MAX).contains(&b) {
                    return Err(Error::InvalidLayout(format!(
                        "code point {b} is not printable"
                    )));
                }
                if !seen.insert(b) {
                    return Err(Error::InvalidLayout(format!(
                        "duplicate key `{}`",
                        b as char
                    )));
                }
            }
        }
        Ok(KeyboardLayout { rows })
    }

    /// Maps a touch point to the printable key whose cell contains it.
    pub fn key_at(&self, x: f64, y: f64) -> Result<KeyCode> {
        let miss = Error::NoKeyAtPoint { x, y };
        if !x.is_finite() || !y.is_finite() || x < 0.0 || y < 0.0 {
            return Err(miss);
        }
        let row = y.floor() as usize;
        let col = x.floor() as usize;
        match self.rows.get(row).and_then(|r| r.as_bytes().get(col)) {
            Some(&b) => Ok(KeyCode::Printable(b)),
            None => Err(miss),
        }
    }

    /// The (col, row) cell of a printable key, if the layout has it.
    pub fn cell_of(&self, key: u8) -> Option<(usize, usize)> {
        for (row, r) in self.rows.iter().enumerate() {
            if let Some(col) = r.bytes().position(|b| b == key) {
                return Some((col, row));
            }
        }
        None
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }
}

impl Default for KeyboardLayout {
    fn default() -> Self {
        KeyboardLayout::qwerty()
    }
}
