//! Scenario files: a declarative JSON document describing the fields, the
//! defense configuration, the adversary, and the keystroke trace to replay.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::ImeKind;
use crate::error::{Error, Result};
use crate::guard::rules::Rule;
use crate::guard::Batching;
use crate::input::layout::KeyboardLayout;
use crate::input::{InputClass, KeyCode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub id: String,
    pub input_class: InputClass,
    #[serde(default)]
    pub marked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BatchingConfig {
    #[default]
    Off,
    Count(usize),
    TimeMs(u64),
}

impl BatchingConfig {
    pub fn to_batching(self) -> Batching {
        match self {
            BatchingConfig::Off => Batching::Off,
            BatchingConfig::Count(n) => Batching::Count(n),
            BatchingConfig::TimeMs(ms) => Batching::Time(ms),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BatchingConfig::Off => "off".to_string(),
            BatchingConfig::Count(n) => format!("count:{n}"),
            BatchingConfig::TimeMs(ms) => format!("time:{ms}ms"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Direct,
    Local,
    Collude,
}

impl AdversaryKind {
    pub fn ime_kind(self) -> ImeKind {
        match self {
            AdversaryKind::Direct => ImeKind::DirectExfil,
            AdversaryKind::Local => ImeKind::LocalLogger,
            AdversaryKind::Collude => ImeKind::CollusionLogger,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Direct => "direct",
            AdversaryKind::Local => "local",
            AdversaryKind::Collude => "collude",
        }
    }
}

/// One trace step. Key names are a single printable character or
/// "BACKSPACE"/"ENTER"; touches go through the keyboard layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceStep {
    Key { field: String, key: String },
    Touch { field: String, touch: [f64; 2] },
    Mark { mark: String, value: bool },
    Tick { tick: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub fields: Vec<FieldDecl>,
    #[serde(default)]
    pub rules: Vec<Rule>,
    pub key_hex: String,
    pub keyguard_enabled: bool,
    #[serde(default)]
    pub batching: BatchingConfig,
    pub adversary: AdversaryKind,
    pub trace: Vec<TraceStep>,
}

fn valid_field_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        serde_json::from_str(text).map_err(|e| Error::ScenarioParse(e.to_string()))
    }

    /// Reads, parses, and validates a scenario file.
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let scenario = Scenario::parse(&text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn key_bytes(&self) -> Result<Vec<u8>> {
        let bytes = hex::decode(&self.key_hex)
            .map_err(|e| Error::ScenarioInvalid(format!("key_hex does not decode: {e}")))?;
        if bytes.is_empty() {
            return Err(Error::ScenarioInvalid("key_hex decodes to zero bytes".into()));
        }
        if bytes.len() > 256 {
            return Err(Error::ScenarioInvalid(format!(
                "key_hex decodes to {} bytes, maximum is 256",
                bytes.len()
            )));
        }
        Ok(bytes)
    }

    pub fn validate(&self) -> Result<()> {
        self.key_bytes()?;

        let mut field_ids = BTreeSet::new();
        for decl in &self.fields {
            if !valid_field_id(&decl.id) {
                return Err(Error::ScenarioInvalid(format!(
                    "field id `{}` must be non-empty [A-Za-z0-9_.-]",
                    decl.id
                )));
            }
            if !field_ids.insert(decl.id.clone()) {
                return Err(Error::ScenarioInvalid(format!(
                    "field `{}` is declared twice",
                    decl.id
                )));
            }
        }

        let mut rule_ids = BTreeSet::new();
        for rule in &self.rules {
            rule.validate()?;
            if !rule_ids.insert(rule.rule_id.clone()) {
                return Err(Error::ScenarioInvalid(format!(
                    "rule `{}` is declared twice",
                    rule.rule_id
                )));
            }
        }

        match self.batching {
            BatchingConfig::Count(0) => {
                return Err(Error::ScenarioInvalid("batching count must be >= 1".into()))
            }
            BatchingConfig::TimeMs(0) => {
                return Err(Error::ScenarioInvalid("batching window must be >= 1 ms".into()))
            }
            _ => {}
        }

        // every key/touch step must reference a field that is declared or
        // was created by an earlier mark step
        let layout = KeyboardLayout::qwerty();
        let mut known = field_ids;
        for (i, step) in self.trace.iter().enumerate() {
            match step {
                TraceStep::Key { field, key } => {
                    KeyCode::parse_name(key)?;
                    if !known.contains(field) {
                        return Err(Error::ScenarioInvalid(format!(
                            "trace step {i} types into undeclared field `{field}`"
                        )));
                    }
                }
                TraceStep::Touch { field, touch } => {
                    layout.key_at(touch[0], touch[1]).map_err(|_| {
                        Error::ScenarioInvalid(format!(
                            "trace step {i} touches ({}, {}) outside every key cell",
                            touch[0], touch[1]
                        ))
                    })?;
                    if !known.contains(field) {
                        return Err(Error::ScenarioInvalid(format!(
                            "trace step {i} touches undeclared field `{field}`"
                        )));
                    }
                }
                TraceStep::Mark { mark, .. } => {
                    if !valid_field_id(mark) {
                        return Err(Error::ScenarioInvalid(format!(
                            "trace step {i} marks invalid field id `{mark}`"
                        )));
                    }
                    known.insert(mark.clone());
                }
                TraceStep::Tick { .. } => {}
            }
        }
        Ok(())
    }

    /// Number of key events (key + touch steps) in the trace.
    pub fn key_event_count(&self) -> usize {
        self.trace
            .iter()
            .filter(|s| matches!(s, TraceStep::Key { .. } | TraceStep::Touch { .. }))
            .count()
    }

    pub fn has_ticks(&self) -> bool {
        self.trace.iter().any(|s| matches!(s, TraceStep::Tick { .. }))
    }

    /// Stable content digest over the canonical serialization.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Digest over the trace and adversary only: two runs are comparable for
    /// passthrough purposes iff these agree.
    pub fn trace_digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.adversary.name().as_bytes());
        for step in &self.trace {
            hasher.update(serde_json::to_vec(step).expect("step serializes"));
        }
        hex::encode(hasher.finalize())
    }

    /// A minimal password-field scenario typing `text`.
    pub fn example_password(field: &str, text: &str, key_hex: &str) -> Scenario {
        Scenario {
            fields: vec![FieldDecl {
                id: field.to_string(),
                input_class: InputClass::PasswordText,
                marked: false,
            }],
            rules: Vec::new(),
            key_hex: key_hex.to_string(),
            keyguard_enabled: true,
            batching: BatchingConfig::Off,
            adversary: AdversaryKind::Direct,
            trace: text
                .chars()
                .map(|c| TraceStep::Key {
                    field: field.to_string(),
                    key: c.to_string(),
                })
                .collect(),
        }
    }
}
