//! Editor buffers of the underlying app: per-field character sequences, a
//! cursor, and the bookkeeping that maps committed characters back to the
//! key event that produced them (the write-back handle for decryption).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::input::{CommitAction, FieldId, KeyCode, SelectionUpdate};

#[derive(Debug, Default, Clone)]
struct FieldBuffer {
    chars: Vec<u8>,
    cursor: usize,
    /// (buffer position, event seq) for every committed character.
    commits: Vec<(usize, u64)>,
}

#[derive(Debug, Default, Clone)]
pub struct EditorState {
    fields: BTreeMap<FieldId, FieldBuffer>,
}

impl EditorState {
    pub fn new() -> EditorState {
        EditorState::default()
    }

    pub fn create_field(&mut self, field_id: &str) {
        self.fields.entry(field_id.to_string()).or_default();
    }

    fn field_mut(&mut self, field_id: &str) -> Result<&mut FieldBuffer> {
        self.fields
            .get_mut(field_id)
            .ok_or_else(|| Error::UnknownField(field_id.to_string()))
    }

    fn field(&self, field_id: &str) -> Result<&FieldBuffer> {
        self.fields
            .get(field_id)
            .ok_or_else(|| Error::UnknownField(field_id.to_string()))
    }

    /// Applies a commit action and reports the resulting cursor movement.
    pub fn apply(&mut self, field_id: &str, action: CommitAction) -> Result<SelectionUpdate> {
        let buf = self.field_mut(field_id)?;
        let old = buf.cursor;
        match action {
            CommitAction::CommitChar { code, seq } => {
                let pos = buf.cursor;
                buf.chars.insert(pos, code);
                for (p, _) in buf.commits.iter_mut() {
                    if *p >= pos {
                        *p += 1;
                    }
                }
                buf.commits.push((pos, seq));
                buf.cursor = pos + 1;
            }
            CommitAction::Backspace => {
                if buf.cursor > 0 {
                    let pos = buf.cursor - 1;
                    buf.chars.remove(pos);
                    buf.commits.retain(|(p, _)| *p != pos);
                    for (p, _) in buf.commits.iter_mut() {
                        if *p > pos {
                            *p -= 1;
                        }
                    }
                    buf.cursor = pos;
                }
            }
            CommitAction::Enter => {}
        }
        let new = buf.cursor;
        Ok(SelectionUpdate::collapsed(field_id, old, new))
    }

    /// Replaces in place the character committed under `seq`. The cursor
    /// does not move.
    pub fn replace_at(&mut self, field_id: &str, seq: u64, replacement: KeyCode) -> Result<()> {
        let code = match replacement {
            KeyCode::Printable(c) => c,
            other => return Err(Error::NotPrintable(other.code_point())),
        };
        let buf = self.field_mut(field_id)?;
        let pos = buf
            .commits
            .iter()
            .find(|(_, s)| *s == seq)
            .map(|(p, _)| *p)
            .ok_or_else(|| Error::SeqNotFound {
                field_id: field_id.to_string(),
                seq,
            })?;
        buf.chars[pos] = code;
        Ok(())
    }

    /// The character currently at the buffer position committed under `seq`.
    pub fn char_at_seq(&self, field_id: &str, seq: u64) -> Result<u8> {
        let buf = self.field(field_id)?;
        let pos = buf
            .commits
            .iter()
            .find(|(_, s)| *s == seq)
            .map(|(p, _)| *p)
            .ok_or_else(|| Error::SeqNotFound {
                field_id: field_id.to_string(),
                seq,
            })?;
        Ok(buf.chars[pos])
    }

    pub fn text(&self, field_id: &str) -> Result<String> {
        let buf = self.field(field_id)?;
        Ok(buf.chars.iter().map(|&b| b as char).collect())
    }

    pub fn cursor(&self, field_id: &str) -> Result<usize> {
        Ok(self.field(field_id)?.cursor)
    }

    /// Final text of every field, in field-id order.
    pub fn all_text(&self) -> BTreeMap<FieldId, String> {
        self.fields
            .iter()
            .map(|(id, b)| (id.clone(), b.chars.iter().map(|&c| c as char).collect()))
            .collect()
    }
}
