//! Quantifies what the adversary captured against ground truth and compares
//! paired runs for observational equivalence.

pub mod bench;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::CapturedData;
use crate::error::{Error, Result};
use crate::guard::SensitivityReason;
use crate::input::{FieldId, KeyCode};
use crate::runner::RunArtifacts;

/// One keystroke as the trace runner recorded it, outside the adversary's
/// view. Derived solely from the trace and the configuration.
#[derive(Debug, Clone)]
pub struct TruthChar {
    pub field_id: FieldId,
    pub key: KeyCode,
    pub sensitive: bool,
    pub reason: Option<SensitivityReason>,
}

/// Ground truth for a run: per-keystroke plaintext with sensitivity flags,
/// plus the plaintext each field should end up holding.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    /// Keyed by event seq (globally unique within a run).
    pub chars: BTreeMap<u64, TruthChar>,
    pub final_plaintext: BTreeMap<FieldId, String>,
}

impl GroundTruth {
    pub fn record(&mut self, seq: u64, field_id: &str, key: KeyCode, reason: Option<SensitivityReason>) {
        self.chars.insert(
            seq,
            TruthChar {
                field_id: field_id.to_string(),
                key,
                sensitive: reason.is_some(),
                reason,
            },
        );
    }

    /// Marks an already-recorded keystroke sensitive (prefix characters are
    /// flagged retroactively once their rule confirms). Existing reasons win.
    pub fn flag_sensitive(&mut self, seq: u64, reason: SensitivityReason) {
        if let Some(tc) = self.chars.get_mut(&seq) {
            if !tc.sensitive {
                tc.sensitive = true;
                tc.reason = Some(reason);
            }
        }
    }
}

/// Leakage counters for one field (or the whole run).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageCounts {
    /// Ground-truth sensitive characters.
    pub sensitive_chars: u64,
    /// Captured characters equal to the ground-truth plaintext at the same
    /// (field, seq) position inside sensitive spans.
    pub exposed_plaintext: u64,
    pub exposure_ratio: f64,
    /// True when sensitive_chars is zero and the ratio is reported as 0.
    pub empty_denominator: bool,
    /// Captured characters outside sensitive spans.
    pub nonsensitive_captured: u64,
}

impl LeakageCounts {
    fn from_raw(sensitive: u64, exposed: u64, nonsensitive: u64) -> LeakageCounts {
        LeakageCounts {
            sensitive_chars: sensitive,
            exposed_plaintext: exposed,
            exposure_ratio: if sensitive == 0 {
                0.0
            } else {
                exposed as f64 / sensitive as f64
            },
            empty_denominator: sensitive == 0,
            nonsensitive_captured: nonsensitive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldLeakage {
    pub field_id: FieldId,
    pub sensitive_chars: u64,
    pub exposed_plaintext: u64,
    pub exposure_ratio: f64,
    pub empty_denominator: bool,
    pub nonsensitive_captured: u64,
}

/// Per-channel, per-field accounting of plaintext exposed to the adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub channel: String,
    pub exfiltrated: bool,
    pub per_field: Vec<FieldLeakage>,
    pub overall: LeakageCounts,
}

/// Aligns captures to ground truth by (field, seq) and counts positional
/// plaintext matches inside sensitive spans.
pub fn compute_leakage(truth: &GroundTruth, captured: &CapturedData) -> Result<LeakageReport> {
    #[derive(Default)]
    struct Acc {
        sensitive: u64,
        exposed: u64,
        nonsensitive: u64,
    }
    let mut fields: BTreeMap<FieldId, Acc> = BTreeMap::new();

    for tc in truth.chars.values() {
        let acc = fields.entry(tc.field_id.clone()).or_default();
        if tc.sensitive {
            acc.sensitive += 1;
        }
    }
    for entry in &captured.entries {
        let tc = truth.chars.get(&entry.seq).ok_or_else(|| {
            Error::RunMismatch(format!("captured seq {} is absent from ground truth", entry.seq))
        })?;
        if tc.field_id != entry.field_id {
            return Err(Error::RunMismatch(format!(
                "captured seq {} reports field `{}` but ground truth has `{}`",
                entry.seq, entry.field_id, tc.field_id
            )));
        }
        let acc = fields.entry(tc.field_id.clone()).or_default();
        if tc.sensitive {
            if entry.observed == tc.key {
                acc.exposed += 1;
            }
        } else {
            acc.nonsensitive += 1;
        }
    }

    let mut per_field = Vec::new();
    let (mut t_sens, mut t_exp, mut t_non) = (0, 0, 0);
    for (field_id, acc) in &fields {
        t_sens += acc.sensitive;
        t_exp += acc.exposed;
        t_non += acc.nonsensitive;
        let c = LeakageCounts::from_raw(acc.sensitive, acc.exposed, acc.nonsensitive);
        per_field.push(FieldLeakage {
            field_id: field_id.clone(),
            sensitive_chars: c.sensitive_chars,
            exposed_plaintext: c.exposed_plaintext,
            exposure_ratio: c.exposure_ratio,
            empty_denominator: c.empty_denominator,
            nonsensitive_captured: c.nonsensitive_captured,
        });
    }
    Ok(LeakageReport {
        channel: captured.channel.name().to_string(),
        exfiltrated: captured.exfiltrated,
        per_field,
        overall: LeakageCounts::from_raw(t_sens, t_exp, t_non),
    })
}

/// First place two keylogger logs disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDivergence {
    pub index: usize,
    pub a: String,
    pub b: String,
}

/// Byte-level comparison of two runs' adversary logs and final editors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassthroughDiff {
    pub identical: bool,
    pub log_differences: u64,
    pub first_log_divergence: Option<LogDivergence>,
    pub editor_differences: Vec<FieldId>,
}

impl PassthroughDiff {
    pub fn is_empty(&self) -> bool {
        self.identical
    }
}

/// Compares two runs of the identical trace and adversary: the KeyloggerLogs
/// byte for byte, and the final editor state of every field. An empty diff
/// means the runs are observationally equivalent.
pub fn compare_passthrough(a: &RunArtifacts, b: &RunArtifacts) -> Result<PassthroughDiff> {
    if a.trace_digest != b.trace_digest {
        return Err(Error::TraceMismatch);
    }
    let mut log_differences = 0u64;
    let mut first = None;
    let max_len = a.log.len().max(b.log.len());
    for i in 0..max_len {
        let ea = a.log.get(i);
        let eb = b.log.get(i);
        let same = match (ea, eb) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        };
        if !same {
            log_differences += 1;
            if first.is_none() {
                let show = |e: Option<&crate::adversary::LogEntry>| match e {
                    Some(e) => format!("{},{},{}", e.seq, e.field_id, e.observed.name()),
                    None => "(missing)".to_string(),
                };
                first = Some(LogDivergence {
                    index: i,
                    a: show(ea),
                    b: show(eb),
                });
            }
        }
    }
    let mut editor_differences = Vec::new();
    let keys: std::collections::BTreeSet<_> =
        a.editors.keys().chain(b.editors.keys()).cloned().collect();
    for field in keys {
        if a.editors.get(&field) != b.editors.get(&field) {
            editor_differences.push(field);
        }
    }
    Ok(PassthroughDiff {
        identical: log_differences == 0 && editor_differences.is_empty(),
        log_differences,
        first_log_divergence: first,
        editor_differences,
    })
}
