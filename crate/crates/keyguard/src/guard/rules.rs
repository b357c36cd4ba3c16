//! Streaming sensitivity rules: once a rule's prefix appears in the typed
//! text, the following `total_length - |prefix|` characters are treated as
//! sensitive. Matching runs over a hook-layer-private plaintext buffer;
//! BACKSPACE rewinds the state machine one step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::{ControlKey, FieldId, KeyCode, PRINTABLE_MAX, PRINTABLE_MIN};

/// A (prefix, total_length) sensitivity pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub rule_id: String,
    pub prefix: String,
    pub total_length: usize,
}

impl Rule {
    pub fn validate(&self) -> Result<()> {
        if self.rule_id.is_empty() {
            return Err(Error::ScenarioInvalid("rule_id must not be empty".into()));
        }
        if self.prefix.is_empty() {
            return Err(Error::ScenarioInvalid(format!(
                "rule `{}` has an empty prefix",
                self.rule_id
            )));
        }
        if !self
            .prefix
            .bytes()
            .all(|b| (PRINTABLE_MIN..=PRINTABLE_MAX).contains(&b))
        {
            return Err(Error::ScenarioInvalid(format!(
                "rule `{}` prefix contains non-printable characters",
                self.rule_id
            )));
        }
        if self.total_length <= self.prefix.len() {
            return Err(Error::ScenarioInvalid(format!(
                "rule `{}` total_length {} must exceed the prefix length {}",
                self.rule_id,
                self.total_length,
                self.prefix.len()
            )));
        }
        Ok(())
    }

    /// Characters to protect once the prefix is seen.
    pub fn span_len(&self) -> usize {
        self.total_length - self.prefix.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RuleStatus {
    Scanning,
    Armed { remaining: usize },
}

/// A confirmed prefix occurrence, reported on the keystroke that completed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfirmedMatch {
    pub rule_id: String,
    /// Event seqs of the buffer characters forming the matched prefix.
    pub prefix_seqs: Vec<u64>,
}

/// What one fed key did to the matcher.
#[derive(Debug, Clone, Default)]
pub struct MatchUpdate {
    /// Whether the fed key itself lay inside an already-armed span.
    pub in_armed_span: bool,
    /// Prefix matches completed by this key (a key can complete several rules).
    pub confirmed: Vec<ConfirmedMatch>,
}

#[derive(Debug, Clone)]
struct FieldMatchState {
    /// Trusted plaintext view; never leaves the defense layer.
    buffer: Vec<u8>,
    /// Event seq that committed each buffer character.
    seqs: Vec<u64>,
    statuses: Vec<RuleStatus>,
    /// Status snapshot taken before each printable feed, popped on BACKSPACE
    /// to rewind exactly one step.
    history: Vec<Vec<RuleStatus>>,
}

impl FieldMatchState {
    fn new(rule_count: usize) -> FieldMatchState {
        FieldMatchState {
            buffer: Vec::new(),
            seqs: Vec::new(),
            statuses: vec![RuleStatus::Scanning; rule_count],
            history: Vec::new(),
        }
    }
}

/// Per-field streaming matcher over the configured rules.
#[derive(Debug, Clone)]
pub struct RuleMatcher {
    rules: Vec<Rule>,
    fields: BTreeMap<FieldId, FieldMatchState>,
}

impl RuleMatcher {
    pub fn new(rules: Vec<Rule>) -> Result<RuleMatcher> {
        for rule in &rules {
            rule.validate()?;
        }
        Ok(RuleMatcher {
            rules,
            fields: BTreeMap::new(),
        })
    }

    /// Feeds one plaintext key. Printables extend the buffer and may arm or
    /// consume rule spans; BACKSPACE pops the buffer and restores the
    /// pre-feed statuses; ENTER changes nothing.
    pub fn feed(&mut self, field_id: &str, key: KeyCode, seq: u64) -> MatchUpdate {
        let rule_count = self.rules.len();
        let state = self
            .fields
            .entry(field_id.to_string())
            .or_insert_with(|| FieldMatchState::new(rule_count));

        match key {
            KeyCode::Printable(c) => {
                let in_armed_span = state
                    .statuses
                    .iter()
                    .any(|s| matches!(s, RuleStatus::Armed { .. }));
                state.history.push(state.statuses.clone());
                for status in state.statuses.iter_mut() {
                    if let RuleStatus::Armed { remaining } = status {
                        *remaining -= 1;
                        if *remaining == 0 {
                            *status = RuleStatus::Scanning;
                        }
                    }
                }
                state.buffer.push(c);
                state.seqs.push(seq);
                let mut confirmed = Vec::new();
                for (idx, rule) in self.rules.iter().enumerate() {
                    let prefix = rule.prefix.as_bytes();
                    if state.buffer.ends_with(prefix) {
                        // A fresh occurrence always (re-)arms the full span.
                        state.statuses[idx] = RuleStatus::Armed {
                            remaining: rule.span_len(),
                        };
                        confirmed.push(ConfirmedMatch {
                            rule_id: rule.rule_id.clone(),
                            prefix_seqs: state.seqs[state.seqs.len() - prefix.len()..].to_vec(),
                        });
                    }
                }
                MatchUpdate {
                    in_armed_span,
                    confirmed,
                }
            }
            KeyCode::Control(ControlKey::Backspace) => {
                if !state.buffer.is_empty() {
                    state.buffer.pop();
                    state.seqs.pop();
                    if let Some(prev) = state.history.pop() {
                        state.statuses = prev;
                    }
                }
                MatchUpdate::default()
            }
            KeyCode::Control(ControlKey::Enter) => MatchUpdate::default(),
        }
    }

    /// The trusted plaintext buffer of a field (tests and diagnostics).
    pub fn buffer(&self, field_id: &str) -> &[u8] {
        self.fields
            .get(field_id)
            .map(|s| s.buffer.as_slice())
            .unwrap_or(&[])
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }
}
