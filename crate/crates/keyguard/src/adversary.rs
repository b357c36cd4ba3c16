//! Keylogger IME implementations for the three threat models, plus the
//! passive stores they leak into: the simulated exfiltration server, the
//! shared local file store, and the colluding app that reads it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::{CommitAction, ControlKey, FieldId, KeyCode, KeyDispatch, SelectionUpdate};

/// The three keylogger variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImeKind {
    /// Pushes every entry to the remote server as it arrives.
    DirectExfil,
    /// Logs to a local file and keeps the data on-device.
    LocalLogger,
    /// Logs to a local file a second app knows how to find.
    CollusionLogger,
}

impl ImeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ImeKind::DirectExfil => "DirectExfil",
            ImeKind::LocalLogger => "LocalLogger",
            ImeKind::CollusionLogger => "CollusionLogger",
        }
    }
}

/// One captured keystroke as the adversary saw it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub seq: u64,
    pub field_id: FieldId,
    pub observed: KeyCode,
}

impl LogEntry {
    /// Log file line format: `seq,field_id,codepoint\n`, codepoint decimal.
    pub fn serialize_line(&self) -> String {
        format!("{},{},{}\n", self.seq, self.field_id, self.observed.code_point())
    }

    pub fn parse_line(line: &str) -> Result<LogEntry> {
        let mut parts = line.splitn(3, ',');
        let bad = || Error::RunMismatch(format!("malformed log line `{line}`"));
        let seq = parts
            .next()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(bad)?;
        let field_id = parts.next().ok_or_else(bad)?.to_string();
        let cp = parts
            .next()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(bad)?;
        Ok(LogEntry {
            seq,
            field_id,
            observed: KeyCode::from_code_point(cp)?,
        })
    }
}

/// Append-only record of everything the IME observed, in dispatch order.
#[derive(Debug, Default, Clone)]
pub struct KeyloggerLog {
    pub entries: Vec<LogEntry>,
}

/// The simulated remote database of threat model 1.
#[derive(Debug, Default, Clone)]
pub struct ExfilServer {
    pub received: Vec<LogEntry>,
}

/// Shared local storage: write-then-read returns the written bytes.
#[derive(Debug, Default, Clone)]
pub struct SharedFileStore {
    files: BTreeMap<String, Vec<u8>>,
}

impl SharedFileStore {
    pub fn append(&mut self, path: &str, bytes: &[u8]) {
        self.files.entry(path.to_string()).or_default().extend_from_slice(bytes);
    }

    pub fn read(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(|v| v.as_slice())
    }
}

/// The second app of threat model 3; it only ever touches the shared store.
#[derive(Debug, Clone)]
pub struct ColludingApp {
    pub known_path: String,
}

impl ColludingApp {
    pub fn read_log(&self, store: &SharedFileStore) -> Result<Vec<LogEntry>> {
        let Some(bytes) = store.read(&self.known_path) else {
            return Ok(Vec::new());
        };
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::RunMismatch("log file is not UTF-8".into()))?;
        text.lines().map(LogEntry::parse_line).collect()
    }
}

/// Which post-run collection channel the analyst inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Direct,
    Collude,
    LocalOnly,
}

impl Channel {
    pub fn name(&self) -> &'static str {
        match self {
            Channel::Direct => "Direct",
            Channel::Collude => "Collude",
            Channel::LocalOnly => "LocalOnly",
        }
    }

    /// The channel each IME kind leaks through.
    pub fn for_kind(kind: ImeKind) -> Channel {
        match kind {
            ImeKind::DirectExfil => Channel::Direct,
            ImeKind::LocalLogger => Channel::LocalOnly,
            ImeKind::CollusionLogger => Channel::Collude,
        }
    }
}

/// What the adversary holds after a run.
#[derive(Debug, Clone)]
pub struct CapturedData {
    pub channel: Channel,
    pub entries: Vec<LogEntry>,
    /// False for LocalOnly: captured but not yet off-device.
    pub exfiltrated: bool,
}

/// The keylogger IME plus the passive stores it leaks into.
#[derive(Debug, Clone)]
pub struct AdversaryWorld {
    pub kind: ImeKind,
    pub log: KeyloggerLog,
    pub exfil: ExfilServer,
    pub files: SharedFileStore,
    pub colluder: Option<ColludingApp>,
    pub log_path: String,
    pub update_count: u64,
    /// Selection updates recorded verbatim (indices only, never text).
    pub telemetry: Vec<SelectionUpdate>,
}

impl AdversaryWorld {
    pub fn new(kind: ImeKind) -> AdversaryWorld {
        let log_path = "/data/keylogger/keys.log".to_string();
        AdversaryWorld {
            kind,
            log: KeyloggerLog::default(),
            exfil: ExfilServer::default(),
            files: SharedFileStore::default(),
            colluder: match kind {
                ImeKind::CollusionLogger => Some(ColludingApp {
                    known_path: log_path.clone(),
                }),
                _ => None,
            },
            log_path,
            update_count: 0,
            telemetry: Vec::new(),
        }
    }

    /// The IME's key handler: logs whatever arrived and turns it into a
    /// commit action. This is the adversary; it accepts anything well-formed.
    pub fn on_key(&mut self, dispatch: &KeyDispatch) -> CommitAction {
        let entry = LogEntry {
            seq: dispatch.seq,
            field_id: dispatch.field_id.clone(),
            observed: dispatch.primary_code,
        };
        match self.kind {
            ImeKind::DirectExfil => self.exfil.received.push(entry.clone()),
            ImeKind::LocalLogger | ImeKind::CollusionLogger => {
                let line = entry.serialize_line();
                self.files.append(&self.log_path, line.as_bytes());
            }
        }
        self.log.entries.push(entry);
        match dispatch.primary_code {
            KeyCode::Printable(code) => CommitAction::CommitChar {
                code,
                seq: dispatch.seq,
            },
            KeyCode::Control(ControlKey::Backspace) => CommitAction::Backspace,
            KeyCode::Control(ControlKey::Enter) => CommitAction::Enter,
        }
    }

    /// The IME's selection handler: sees the six indices, never the text.
    pub fn on_update_selection(&mut self, upd: &SelectionUpdate) {
        self.update_count += 1;
        self.telemetry.push(upd.clone());
    }

    /// Post-run collection over the given channel.
    pub fn collect(&self, channel: Channel) -> Result<CapturedData> {
        let mismatch = || Error::ChannelMismatch {
            channel: channel.name().to_string(),
            kind: self.kind.name().to_string(),
        };
        match (self.kind, channel) {
            (ImeKind::DirectExfil, Channel::Direct) => Ok(CapturedData {
                channel,
                entries: self.exfil.received.clone(),
                exfiltrated: true,
            }),
            (ImeKind::CollusionLogger, Channel::Collude) => {
                let colluder = self.colluder.as_ref().ok_or_else(mismatch)?;
                Ok(CapturedData {
                    channel,
                    entries: colluder.read_log(&self.files)?,
                    exfiltrated: true,
                })
            }
            (ImeKind::LocalLogger, Channel::LocalOnly) => Ok(CapturedData {
                channel,
                entries: self.log.entries.clone(),
                exfiltrated: false,
            }),
            _ => Err(mismatch()),
        }
    }
}
