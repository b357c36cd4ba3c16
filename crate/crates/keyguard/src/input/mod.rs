//! The simulated input stack: key codes, key events, per-field contexts,
//! selection updates, editor buffers, and the virtual clock. Everything
//! upstream and downstream of the IME lives here.

pub mod clock;
pub mod editor;
pub mod layout;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field identifiers are plain strings throughout the simulator.
pub type FieldId = String;

pub const PRINTABLE_MIN: u8 = 32;
pub const PRINTABLE_MAX: u8 = 126;
/// Size of the printable alphabet (32..=126).
pub const PRINTABLE_COUNT: u8 = 95;

/// The only control keys in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlKey {
    Backspace,
    Enter,
}

/// A key code: either one of the 95 printable ASCII symbols or a control key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyCode {
    Printable(u8),
    Control(ControlKey),
}

impl KeyCode {
    pub const BACKSPACE: KeyCode = KeyCode::Control(ControlKey::Backspace);
    pub const ENTER: KeyCode = KeyCode::Control(ControlKey::Enter);

    /// Builds a printable key code, rejecting anything outside 32..=126.
    pub fn printable(code: u8) -> Result<KeyCode> {
        if (PRINTABLE_MIN..=PRINTABLE_MAX).contains(&code) {
            Ok(KeyCode::Printable(code))
        } else {
            Err(Error::NotPrintable(code as u32))
        }
    }

    pub fn from_char(c: char) -> Result<KeyCode> {
        let cp = c as u32;
        if (PRINTABLE_MIN as u32..=PRINTABLE_MAX as u32).contains(&cp) {
            Ok(KeyCode::Printable(cp as u8))
        } else {
            Err(Error::NotPrintable(cp))
        }
    }

    pub fn is_printable(&self) -> bool {
        matches!(self, KeyCode::Printable(_))
    }

    /// The decimal code point used in serialized logs: the printable code
    /// itself, 8 for BACKSPACE, 10 for ENTER.
    pub fn code_point(&self) -> u32 {
        match self {
            KeyCode::Printable(c) => *c as u32,
            KeyCode::Control(ControlKey::Backspace) => 8,
            KeyCode::Control(ControlKey::Enter) => 10,
        }
    }

    pub fn from_code_point(cp: u32) -> Result<KeyCode> {
        match cp {
            8 => Ok(KeyCode::BACKSPACE),
            10 => Ok(KeyCode::ENTER),
            _ if (PRINTABLE_MIN as u32..=PRINTABLE_MAX as u32).contains(&cp) => {
                Ok(KeyCode::Printable(cp as u8))
            }
            _ => Err(Error::NotPrintable(cp)),
        }
    }

    /// Trace/report spelling: the character itself, or "BACKSPACE"/"ENTER".
    pub fn name(&self) -> String {
        match self {
            KeyCode::Printable(c) => (*c as char).to_string(),
            KeyCode::Control(ControlKey::Backspace) => "BACKSPACE".to_string(),
            KeyCode::Control(ControlKey::Enter) => "ENTER".to_string(),
        }
    }

    pub fn parse_name(name: &str) -> Result<KeyCode> {
        match name {
            "BACKSPACE" => Ok(KeyCode::BACKSPACE),
            "ENTER" => Ok(KeyCode::ENTER),
            _ => {
                let mut chars = name.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => KeyCode::from_char(c),
                    _ => Err(Error::ScenarioInvalid(format!(
                        "key `{name}` is neither a single printable character nor BACKSPACE/ENTER"
                    ))),
                }
            }
        }
    }
}

impl fmt::Display for KeyCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// One keystroke of a run, stamped with the virtual clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyEvent {
    pub field_id: FieldId,
    /// Monotone event index, 0-based per run.
    pub seq: u64,
    pub key: KeyCode,
    /// Virtual milliseconds.
    pub t: u64,
}

/// The argument record the IME's key handler receives. Hooks may rewrite
/// `primary_code` and `key_codes[0]` coherently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyDispatch {
    pub primary_code: KeyCode,
    pub key_codes: Vec<KeyCode>,
    pub field_id: FieldId,
    pub seq: u64,
}

impl KeyDispatch {
    pub fn from_event(ev: &KeyEvent) -> KeyDispatch {
        KeyDispatch {
            primary_code: ev.key,
            key_codes: vec![ev.key],
            field_id: ev.field_id.clone(),
            seq: ev.seq,
        }
    }

    /// Rewrites the primary code and the first candidate together.
    pub fn rewrite_primary(&mut self, key: KeyCode) {
        self.primary_code = key;
        self.key_codes[0] = key;
    }
}

/// Input class of a field, immutable per field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputClass {
    PasswordText,
    PlainText,
}

/// Per-field sensitivity context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldContext {
    pub field_id: FieldId,
    pub input_class: InputClass,
    pub user_marked: bool,
}

/// Registry of field contexts. Marking an unseen field lazily creates a
/// PlainText context for it.
#[derive(Debug, Default, Clone)]
pub struct FieldContexts {
    map: BTreeMap<FieldId, FieldContext>,
}

impl FieldContexts {
    pub fn new() -> FieldContexts {
        FieldContexts::default()
    }

    pub fn declare(&mut self, field_id: &str, input_class: InputClass, user_marked: bool) {
        self.map.insert(
            field_id.to_string(),
            FieldContext {
                field_id: field_id.to_string(),
                input_class,
                user_marked,
            },
        );
    }

    pub fn get(&self, field_id: &str) -> Option<&FieldContext> {
        self.map.get(field_id)
    }

    /// The context for a field, defaulting to an unmarked PlainText context.
    pub fn context_or_plain(&self, field_id: &str) -> FieldContext {
        self.map.get(field_id).cloned().unwrap_or(FieldContext {
            field_id: field_id.to_string(),
            input_class: InputClass::PlainText,
            user_marked: false,
        })
    }

    /// Sets the user-marked flag; takes effect from the next keystroke.
    pub fn set_marked(&mut self, field_id: &str, marked: bool) {
        self.map
            .entry(field_id.to_string())
            .or_insert(FieldContext {
                field_id: field_id.to_string(),
                input_class: InputClass::PlainText,
                user_marked: false,
            })
            .user_marked = marked;
    }

    pub fn ids(&self) -> impl Iterator<Item = &FieldId> {
        self.map.keys()
    }
}

/// The six-index record the IME receives when the editor's selection moves.
/// The candidates indices are fixed at -1: the model has no composing region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionUpdate {
    pub field_id: FieldId,
    pub old_sel_start: usize,
    pub old_sel_end: usize,
    pub new_sel_start: usize,
    pub new_sel_end: usize,
    pub candidates_start: i64,
    pub candidates_end: i64,
}

impl SelectionUpdate {
    /// A collapsed-cursor update (start == end on both sides).
    pub fn collapsed(field_id: &str, old: usize, new: usize) -> SelectionUpdate {
        SelectionUpdate {
            field_id: field_id.to_string(),
            old_sel_start: old,
            old_sel_end: old,
            new_sel_start: new,
            new_sel_end: new,
            candidates_start: -1,
            candidates_end: -1,
        }
    }
}

/// What the IME asks the editor to do after handling a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitAction {
    CommitChar { code: u8, seq: u64 },
    Backspace,
    Enter,
}
