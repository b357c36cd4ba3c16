//! Run reports: a canonical machine document with fixed top-level keys
//! (scenario, leakage, passthrough, latency, audit) and a human-readable
//! text rendering. Identical reports serialize byte-identically.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::bench::LatencyStats;
use crate::analysis::{LeakageReport, PassthroughDiff};
use crate::runner::AuditEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportScenario {
    pub digest: String,
    pub adversary: String,
    pub keyguard_enabled: bool,
    pub batching: String,
    pub key_events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: ReportScenario,
    pub leakage: LeakageReport,
    pub passthrough: Option<PassthroughDiff>,
    pub latency: Option<LatencyStats>,
    pub audit: Vec<AuditEntry>,
    #[serde(skip)]
    pub desync: bool,
}

/// `exposed/sensitive (pct%)`, e.g. 3/8 (37.5%).
pub fn format_ratio(exposed: u64, sensitive: u64, empty_denominator: bool) -> String {
    if empty_denominator {
        return format!("{exposed}/0 (0.0%, no sensitive chars)");
    }
    let pct = 100.0 * exposed as f64 / sensitive as f64;
    format!("{exposed}/{sensitive} ({pct:.1}%)")
}

pub fn emit_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Machine => {
            let mut out =
                serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
        ReportFormat::Text => render_text(report),
    }
}

const AUDIT_EXCERPT: usize = 12;

fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let s = &report.scenario;
    let _ = writeln!(
        out,
        "scenario {}  adversary={}  keyguard={}  batching={}  key_events={}",
        &s.digest[..12.min(s.digest.len())],
        s.adversary,
        if s.keyguard_enabled { "on" } else { "off" },
        s.batching,
        s.key_events
    );
    let _ = writeln!(
        out,
        "channel={}  exfiltrated={}",
        report.leakage.channel,
        if report.leakage.exfiltrated { "yes" } else { "no (on-device only)" }
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<16} {:>9} {:>8}  {:<22} {:>12}",
        "field", "sensitive", "exposed", "exposure", "nonsensitive"
    );
    for f in &report.leakage.per_field {
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>8}  {:<22} {:>12}",
            f.field_id,
            f.sensitive_chars,
            f.exposed_plaintext,
            format_ratio(f.exposed_plaintext, f.sensitive_chars, f.empty_denominator),
            f.nonsensitive_captured
        );
    }
    let o = &report.leakage.overall;
    let _ = writeln!(
        out,
        "{:<16} {:>9} {:>8}  {:<22} {:>12}",
        "overall",
        o.sensitive_chars,
        o.exposed_plaintext,
        format_ratio(o.exposed_plaintext, o.sensitive_chars, o.empty_denominator),
        o.nonsensitive_captured
    );

    if let Some(diff) = &report.passthrough {
        let _ = writeln!(out);
        if diff.identical {
            let _ = writeln!(out, "passthrough: identical to the unhooked baseline");
        } else {
            let _ = writeln!(
                out,
                "passthrough: {} log difference(s), {} editor field(s) differ",
                diff.log_differences,
                diff.editor_differences.len()
            );
            if let Some(d) = &diff.first_log_divergence {
                let _ = writeln!(
                    out,
                    "  first divergence at log index {}: hooked=[{}] baseline=[{}]",
                    d.index, d.a, d.b
                );
            }
        }
    }

    if let Some(lat) = &report.latency {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "latency ({} reps x {} key events, microseconds):",
            lat.repetitions, lat.key_events
        );
        let _ = writeln!(
            out,
            "{:<20} {:>8} {:>10} {:>10} {:>10} {:>12}",
            "point", "n", "mean", "p95", "max", "added mean"
        );
        for (name, p) in [
            ("onKey hooked", &lat.on_key.hooked),
            ("onKey baseline", &lat.on_key.baseline),
            ("onUpdateSel hooked", &lat.on_update_selection.hooked),
            ("onUpdateSel baseline", &lat.on_update_selection.baseline),
        ] {
            let added = if name.ends_with("hooked") {
                if name.starts_with("onKey") {
                    format!("{:+.3}", lat.on_key.added_mean_us)
                } else {
                    format!("{:+.3}", lat.on_update_selection.added_mean_us)
                }
            } else {
                String::new()
            };
            let _ = writeln!(
                out,
                "{:<20} {:>8} {:>10.3} {:>10.3} {:>10.3} {:>12}",
                name, p.n, p.mean_us, p.p95_us, p.max_us, added
            );
        }
    }

    let _ = writeln!(out);
    let shown = report.audit.len().min(AUDIT_EXCERPT);
    let _ = writeln!(
        out,
        "audit (first {shown} of {} key events):",
        report.audit.len()
    );
    let _ = writeln!(
        out,
        "{:>5}  {:<12} {:<10} {:<10} {:<10} {:<16} fault",
        "seq", "field", "typed", "ime_saw", "sensitive", "reason"
    );
    for row in report.audit.iter().take(AUDIT_EXCERPT) {
        let _ = writeln!(
            out,
            "{:>5}  {:<12} {:<10} {:<10} {:<10} {:<16} {}",
            row.seq,
            row.field,
            row.plaintext,
            row.ime_saw.as_deref().unwrap_or("(none)"),
            if row.sensitive { "yes" } else { "no" },
            row.reason.as_deref().unwrap_or("-"),
            row.fault.as_deref().unwrap_or("-")
        );
    }
    if report.desync {
        let _ = writeln!(out);
        let _ = writeln!(out, "DESYNC DETECTED: see fault column above");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::LeakageCounts;

    fn sample_report() -> RunReport {
        RunReport {
            scenario: ReportScenario {
                digest: "abcdef0123456789".into(),
                adversary: "direct".into(),
                keyguard_enabled: true,
                batching: "off".into(),
                key_events: 8,
            },
            leakage: LeakageReport {
                channel: "Direct".into(),
                exfiltrated: true,
                per_field: vec![crate::analysis::FieldLeakage {
                    field_id: "notes".into(),
                    sensitive_chars: 8,
                    exposed_plaintext: 3,
                    exposure_ratio: 0.375,
                    empty_denominator: false,
                    nonsensitive_captured: 0,
                }],
                overall: LeakageCounts {
                    sensitive_chars: 8,
                    exposed_plaintext: 3,
                    exposure_ratio: 0.375,
                    empty_denominator: false,
                    nonsensitive_captured: 0,
                },
            },
            passthrough: None,
            latency: None,
            audit: vec![AuditEntry {
                seq: 0,
                field: "notes".into(),
                plaintext: "a".into(),
                ime_saw: Some("a".into()),
                sensitive: false,
                reason: None,
                fault: None,
            }],
            desync: false,
        }
    }

    #[test]
    fn machine_format_has_stable_keys_and_null_sections() {
        let out = emit_report(&sample_report(), ReportFormat::Machine);
        let positions: Vec<usize> = ["\"scenario\"", "\"leakage\"", "\"passthrough\"", "\"latency\"", "\"audit\""]
            .iter()
            .map(|k| out.find(k).unwrap_or_else(|| panic!("missing key {k}")))
            .collect();
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        assert_eq!(positions, sorted, "top-level keys out of order:\n{out}");
        assert!(out.contains("\"latency\": null"));
        assert!(out.contains("\"passthrough\": null"));
    }

    #[test]
    fn machine_format_round_trips_byte_identically() {
        let out = emit_report(&sample_report(), ReportFormat::Machine);
        let parsed: RunReport = serde_json::from_str(&out).unwrap();
        let out2 = emit_report(&parsed, ReportFormat::Machine);
        assert_eq!(out, out2);
    }

    #[test]
    fn identical_reports_serialize_identically() {
        let a = emit_report(&sample_report(), ReportFormat::Machine);
        let b = emit_report(&sample_report(), ReportFormat::Machine);
        assert_eq!(a, b);
    }

    #[test]
    fn text_format_renders_ratio_as_fraction_and_percent() {
        let out = emit_report(&sample_report(), ReportFormat::Text);
        assert!(out.contains("3/8 (37.5%)"), "got:\n{out}");
    }

    #[test]
    fn ratio_formatting() {
        assert_eq!(format_ratio(3, 8, false), "3/8 (37.5%)");
        assert_eq!(format_ratio(0, 8, false), "0/8 (0.0%)");
        assert_eq!(format_ratio(8, 8, false), "8/8 (100.0%)");
        assert_eq!(format_ratio(0, 0, true), "0/0 (0.0%, no sensitive chars)");
    }
}
