//! The defense: sensitivity classification (password context, streaming
//! rules, user marking), the RC4 keystream with printable-ring mapping, the
//! before-onKey encryptor, the after-onUpdateSelection decryptor, and the
//! batching extension.

pub mod batch;
pub mod rc4;
pub mod ring;
pub mod rules;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use batch::{BatchInput, BatchWindow, Batcher, HeldEvent};
use rc4::Rc4;
use rules::{Rule, RuleMatcher};

use crate::error::{Error, Result};
use crate::input::editor::EditorState;
use crate::input::{
    FieldContext, FieldId, InputClass, KeyCode, KeyDispatch, KeyEvent, SelectionUpdate,
};

/// Why a keystroke was classified sensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensitivityReason {
    PasswordContext,
    UserMarked,
    RuleMatch,
}

impl fmt::Display for SensitivityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SensitivityReason::PasswordContext => "PasswordContext",
            SensitivityReason::UserMarked => "UserMarked",
            SensitivityReason::RuleMatch => "RuleMatch",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityDecision {
    Sensitive(SensitivityReason),
    NotSensitive,
}

impl SensitivityDecision {
    pub fn is_sensitive(&self) -> bool {
        matches!(self, SensitivityDecision::Sensitive(_))
    }

    pub fn reason(&self) -> Option<SensitivityReason> {
        match self {
            SensitivityDecision::Sensitive(r) => Some(*r),
            SensitivityDecision::NotSensitive => None,
        }
    }
}

/// Batching mode from the run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batching {
    Off,
    Count(usize),
    Time(u64),
}

#[derive(Debug, Clone)]
pub struct GuardConfig {
    pub rules: Vec<Rule>,
    pub key: Vec<u8>,
    pub batching: Batching,
}

/// One encrypted commit awaiting restoration by the after-hook.
#[derive(Debug, Clone, Copy)]
pub struct PendingDecrypt {
    pub seq: u64,
    pub ks: u8,
    pub plaintext: u8,
}

/// Password/marked context snapshot, taken when a key arrives.
fn context_reason(ctx: &FieldContext) -> Option<SensitivityReason> {
    if ctx.input_class == InputClass::PasswordText {
        Some(SensitivityReason::PasswordContext)
    } else if ctx.user_marked {
        Some(SensitivityReason::UserMarked)
    } else {
        None
    }
}

/// Live defense state for one run. A guard must never be shared between
/// concurrent dispatches: keystream order is load-bearing.
pub struct Guard {
    rc4: Rc4,
    matcher: RuleMatcher,
    /// Per-field FIFO synchronizing the encryptor with the decryptor.
    pending: BTreeMap<FieldId, VecDeque<PendingDecrypt>>,
    batcher: Option<Batcher>,
    /// Flush-time decisions awaiting their dispatch, keyed by seq.
    batched_decisions: BTreeMap<u64, SensitivityDecision>,
    keystream_drawn: u64,
}

impl Guard {
    pub fn new(config: &GuardConfig) -> Result<Guard> {
        Ok(Guard {
            rc4: Rc4::new(&config.key)?,
            matcher: RuleMatcher::new(config.rules.clone())?,
            pending: BTreeMap::new(),
            batcher: match config.batching {
                Batching::Off => None,
                Batching::Count(n) => Some(Batcher::new(BatchWindow::Count(n))),
                Batching::Time(ms) => Some(Batcher::new(BatchWindow::Time(ms))),
            },
            batched_decisions: BTreeMap::new(),
            keystream_drawn: 0,
        })
    }

    /// Immediate-mode classification. Always feeds the matcher, so the
    /// trusted buffer stays current and BACKSPACE rewinds; control keys are
    /// never sensitive.
    pub fn classify(
        &mut self,
        ctx: &FieldContext,
        key: KeyCode,
        seq: u64,
    ) -> SensitivityDecision {
        let mu = self.matcher.feed(&ctx.field_id, key, seq);
        if !key.is_printable() {
            return SensitivityDecision::NotSensitive;
        }
        if let Some(reason) = context_reason(ctx) {
            return SensitivityDecision::Sensitive(reason);
        }
        if mu.in_armed_span {
            return SensitivityDecision::Sensitive(SensitivityReason::RuleMatch);
        }
        SensitivityDecision::NotSensitive
    }

    /// Accepts one key event. With batching off the event passes straight
    /// through; otherwise it is held and the returned list carries whatever
    /// batch this arrival closed.
    pub fn intake(&mut self, ev: KeyEvent, ctx: &FieldContext) -> Vec<KeyEvent> {
        match &mut self.batcher {
            None => vec![ev],
            Some(batcher) => {
                let held = HeldEvent {
                    ctx_reason: context_reason(ctx),
                    ev,
                };
                let flushed = batcher.step(BatchInput::Arrival(held));
                self.resolve_batch(flushed)
            }
        }
    }

    /// Clock advance; may close a time window.
    pub fn tick(&mut self, now: u64) -> Vec<KeyEvent> {
        match &mut self.batcher {
            None => Vec::new(),
            Some(batcher) => {
                let flushed = batcher.step(BatchInput::Tick(now));
                self.resolve_batch(flushed)
            }
        }
    }

    /// End-of-trace flush of any partial batch.
    pub fn flush_remaining(&mut self) -> Vec<KeyEvent> {
        match &mut self.batcher {
            None => Vec::new(),
            Some(batcher) => {
                let flushed = batcher.flush();
                self.resolve_batch(flushed)
            }
        }
    }

    /// Classifies a flushed batch. The whole batch is fed to the matcher
    /// first; a batch that confirms a prefix match in a field is then
    /// encrypted wholesale for that field, prefix characters included.
    /// Events released in earlier batches are never revisited.
    fn resolve_batch(&mut self, batch: Vec<HeldEvent>) -> Vec<KeyEvent> {
        if batch.is_empty() {
            return Vec::new();
        }
        let mut in_span = Vec::with_capacity(batch.len());
        let mut confirmed_fields = std::collections::BTreeSet::new();
        for held in &batch {
            let mu = self.matcher.feed(&held.ev.field_id, held.ev.key, held.ev.seq);
            in_span.push(mu.in_armed_span);
            if !mu.confirmed.is_empty() {
                confirmed_fields.insert(held.ev.field_id.clone());
            }
        }
        let mut released = Vec::with_capacity(batch.len());
        for (i, held) in batch.into_iter().enumerate() {
            let decision = if !held.ev.key.is_printable() {
                SensitivityDecision::NotSensitive
            } else if let Some(reason) = held.ctx_reason {
                SensitivityDecision::Sensitive(reason)
            } else if confirmed_fields.contains(&held.ev.field_id) || in_span[i] {
                SensitivityDecision::Sensitive(SensitivityReason::RuleMatch)
            } else {
                SensitivityDecision::NotSensitive
            };
            self.batched_decisions.insert(held.ev.seq, decision);
            released.push(held.ev);
        }
        released
    }

    /// The before-hook at onKey: classifies the keystroke and, when it is
    /// sensitive and printable, rewrites the dispatch to ciphertext, drawing
    /// exactly one keystream byte. Non-sensitive keys pass byte-identical
    /// and consume no keystream.
    pub fn before_on_key(
        &mut self,
        ctx: &FieldContext,
        args: &mut KeyDispatch,
    ) -> Result<SensitivityDecision> {
        let decision = if self.batcher.is_some() {
            self.batched_decisions
                .remove(&args.seq)
                .ok_or(Error::BatchDecisionMissing(args.seq))?
        } else {
            self.classify(ctx, args.primary_code, args.seq)
        };
        if decision.is_sensitive() {
            if let KeyCode::Printable(plaintext) = args.primary_code {
                let ks = self.rc4.next_byte();
                self.keystream_drawn += 1;
                let ciphertext = ring::encrypt(plaintext, ks)?;
                args.rewrite_primary(KeyCode::Printable(ciphertext));
                self.pending
                    .entry(args.field_id.clone())
                    .or_default()
                    .push_back(PendingDecrypt {
                        seq: args.seq,
                        ks,
                        plaintext,
                    });
            }
        }
        Ok(decision)
    }

    /// The after-hook at onUpdateSelection: restores the oldest pending
    /// ciphertext character of the field to its recorded plaintext, checking
    /// the decryption against the recorded value. A mismatch or a missing
    /// commit means the keystream desynchronized.
    pub fn after_update_selection(
        &mut self,
        editor: &mut EditorState,
        upd: &SelectionUpdate,
    ) -> Result<()> {
        let Some(queue) = self.pending.get_mut(&upd.field_id) else {
            return Ok(());
        };
        let Some(p) = queue.pop_front() else {
            return Ok(());
        };
        let ciphertext = editor
            .char_at_seq(&upd.field_id, p.seq)
            .map_err(|_| Error::DesyncDetected {
                field_id: upd.field_id.clone(),
                seq: p.seq,
                detail: "pending commit not found in editor".into(),
            })?;
        let decrypted = ring::decrypt(ciphertext, p.ks)?;
        if decrypted != p.plaintext {
            return Err(Error::DesyncDetected {
                field_id: upd.field_id.clone(),
                seq: p.seq,
                detail: format!(
                    "decrypted `{}` but the recorded plaintext is `{}`",
                    decrypted as char, p.plaintext as char
                ),
            });
        }
        editor.replace_at(&upd.field_id, p.seq, KeyCode::Printable(p.plaintext))?;
        Ok(())
    }

    pub fn keystream_drawn(&self) -> u64 {
        self.keystream_drawn
    }

    /// True when every encrypted commit has been restored.
    pub fn pending_empty(&self) -> bool {
        self.pending.values().all(|q| q.is_empty())
    }

    pub fn batching_enabled(&self) -> bool {
        self.batcher.is_some()
    }

    pub fn matcher(&self) -> &RuleMatcher {
        &self.matcher
    }
}
