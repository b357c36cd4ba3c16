//! Pipeline-wide properties checked over randomized scenarios.

use std::collections::BTreeMap;

use proptest::prelude::*;

use keyguard::analysis::compare_passthrough;
use keyguard::guard::rules::{Rule, RuleMatcher};
use keyguard::input::{InputClass, KeyCode};
use keyguard::runner::{replay, HookSetup};
use keyguard::scenario::{AdversaryKind, BatchingConfig, FieldDecl, Scenario, TraceStep};

const KEY_HEX: &str = "4b6579"; // "Key"

fn key_name(c: u8) -> String {
    (c as char).to_string()
}

/// Expected final buffer of every field: plain push/pop over the trace.
fn expected_buffers(scenario: &Scenario) -> BTreeMap<String, String> {
    let mut bufs: BTreeMap<String, String> = scenario
        .fields
        .iter()
        .map(|f| (f.id.clone(), String::new()))
        .collect();
    for step in &scenario.trace {
        match step {
            TraceStep::Key { field, key } => {
                let buf = bufs.entry(field.clone()).or_default();
                match key.as_str() {
                    "BACKSPACE" => {
                        buf.pop();
                    }
                    "ENTER" => {}
                    k => buf.push(k.chars().next().unwrap()),
                }
            }
            TraceStep::Touch { .. } => unreachable!("generators emit key steps only"),
            TraceStep::Mark { mark, .. } => {
                bufs.entry(mark.clone()).or_default();
            }
            TraceStep::Tick { .. } => {}
        }
    }
    bufs
}

fn arb_key() -> impl Strategy<Value = String> {
    prop_oneof![
        8 => (32u8..=126).prop_map(key_name),
        1 => Just("BACKSPACE".to_string()),
        1 => Just("ENTER".to_string()),
    ]
}

fn arb_batching() -> impl Strategy<Value = BatchingConfig> {
    prop_oneof![
        Just(BatchingConfig::Off),
        (1usize..6).prop_map(BatchingConfig::Count),
        (10u64..100).prop_map(BatchingConfig::TimeMs),
    ]
}

fn arb_adversary() -> impl Strategy<Value = AdversaryKind> {
    prop_oneof![
        Just(AdversaryKind::Direct),
        Just(AdversaryKind::Local),
        Just(AdversaryKind::Collude),
    ]
}

/// Scenarios with no sensitive contexts, rules, or marks.
fn arb_nonsensitive_scenario() -> impl Strategy<Value = Scenario> {
    let fields = prop::collection::vec(Just(InputClass::PlainText), 1..3);
    (
        fields,
        prop::collection::vec((0usize..3, arb_key()), 1..60),
        arb_batching(),
        arb_adversary(),
    )
        .prop_map(|(classes, steps, batching, adversary)| {
            let fields: Vec<FieldDecl> = classes
                .iter()
                .enumerate()
                .map(|(i, class)| FieldDecl {
                    id: format!("f{i}"),
                    input_class: *class,
                    marked: false,
                })
                .collect();
            let n = fields.len();
            let trace = steps
                .into_iter()
                .map(|(fi, key)| TraceStep::Key {
                    field: format!("f{}", fi % n),
                    key,
                })
                .collect();
            Scenario {
                fields,
                rules: vec![],
                key_hex: KEY_HEX.to_string(),
                keyguard_enabled: true,
                batching,
                adversary,
                trace,
            }
        })
}

/// Scenarios mixing password and plain fields only: no rules, no marks.
/// Here defense decisions coincide with the field class, which makes the
/// keystream-economy count computable from the trace alone.
fn arb_password_mix_scenario() -> impl Strategy<Value = Scenario> {
    let classes = prop::collection::vec(
        prop_oneof![Just(InputClass::PlainText), Just(InputClass::PasswordText)],
        1..4,
    );
    (
        classes,
        prop::collection::vec((0usize..4, arb_key()), 1..80),
        arb_batching(),
        arb_adversary(),
    )
        .prop_map(|(classes, steps, batching, adversary)| {
            let fields: Vec<FieldDecl> = classes
                .iter()
                .enumerate()
                .map(|(i, class)| FieldDecl {
                    id: format!("f{i}"),
                    input_class: *class,
                    marked: false,
                })
                .collect();
            let n = fields.len();
            let trace = steps
                .into_iter()
                .map(|(fi, key)| TraceStep::Key {
                    field: format!("f{}", fi % n),
                    key,
                })
                .collect();
            Scenario {
                fields,
                rules: vec![],
                key_hex: KEY_HEX.to_string(),
                keyguard_enabled: true,
                batching,
                adversary,
                trace,
            }
        })
}

/// Scenarios mixing password fields, rules, marks, batching, and backspaces.
fn arb_mixed_scenario() -> impl Strategy<Value = Scenario> {
    let classes = prop::collection::vec(
        prop_oneof![Just(InputClass::PlainText), Just(InputClass::PasswordText)],
        1..4,
    );
    let with_rule = any::<bool>();
    (
        classes,
        with_rule,
        prop::collection::vec((0usize..4, arb_key(), any::<bool>()), 1..80),
        arb_batching(),
        arb_adversary(),
    )
        .prop_map(|(classes, with_rule, steps, batching, adversary)| {
            let fields: Vec<FieldDecl> = classes
                .iter()
                .enumerate()
                .map(|(i, class)| FieldDecl {
                    id: format!("f{i}"),
                    input_class: *class,
                    marked: false,
                })
                .collect();
            let n = fields.len();
            let mut trace = Vec::new();
            for (i, (fi, key, mark)) in steps.into_iter().enumerate() {
                let field = format!("f{}", fi % n);
                // sprinkle mark toggles between keystrokes
                if mark && i % 7 == 3 {
                    trace.push(TraceStep::Mark {
                        mark: field.clone(),
                        value: i % 2 == 0,
                    });
                }
                trace.push(TraceStep::Key { field, key });
            }
            Scenario {
                fields,
                rules: if with_rule {
                    vec![Rule {
                        rule_id: "r".into(),
                        prefix: "ab".into(),
                        total_length: 5,
                    }]
                } else {
                    vec![]
                },
                key_hex: KEY_HEX.to_string(),
                keyguard_enabled: true,
                batching,
                adversary,
                trace,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // With nothing sensitive configured, the defended pipeline is
    // observationally identical to the undefended one: same adversary log,
    // same final editors.
    #[test]
    fn passthrough_transparency(scenario in arb_nonsensitive_scenario()) {
        let on = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
        let mut disabled = scenario.clone();
        disabled.keyguard_enabled = false;
        let off = replay(&disabled, HookSetup::AsConfigured, None).unwrap();
        prop_assert_eq!(&on.log, &off.log);
        prop_assert_eq!(&on.editors, &off.editors);
        prop_assert_eq!(on.keystream_drawn, 0);
        let diff = compare_passthrough(&on, &off).unwrap();
        prop_assert!(diff.identical);
    }

    // Whatever the defense does, the text the app ends up with equals the
    // plaintext the trace typed.
    #[test]
    fn end_state_correctness(scenario in arb_mixed_scenario()) {
        let run = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
        prop_assert!(!run.desync, "well-formed run must not desync");
        let expected = expected_buffers(&scenario);
        for (field, text) in &expected {
            prop_assert_eq!(
                run.editors.get(field).map(String::as_str).unwrap_or(""),
                text.as_str(),
                "field {}", field
            );
        }
        prop_assert_eq!(&run.truth.final_plaintext, &expected);
    }

    // The audit's what-IME-saw column is the adversary capture, seq by seq.
    #[test]
    fn audit_equals_capture(scenario in arb_mixed_scenario()) {
        let run = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
        let by_seq: BTreeMap<u64, String> = run
            .captured
            .entries
            .iter()
            .map(|e| (e.seq, e.observed.name()))
            .collect();
        prop_assert_eq!(run.audit.len(), scenario.key_event_count());
        for row in &run.audit {
            prop_assert_eq!(row.ime_saw.as_ref(), by_seq.get(&row.seq));
        }
    }

    // Keystream economy: exactly one byte per sensitive printable, none
    // otherwise. With password fields only (no rules/marks), the sensitive
    // printables are exactly the printables typed into password fields.
    #[test]
    fn keystream_economy(scenario in arb_password_mix_scenario()) {
        let password_fields: Vec<&str> = scenario
            .fields
            .iter()
            .filter(|f| f.input_class == InputClass::PasswordText)
            .map(|f| f.id.as_str())
            .collect();
        let expected: u64 = scenario
            .trace
            .iter()
            .filter(|s| match s {
                TraceStep::Key { field, key } => {
                    password_fields.contains(&field.as_str())
                        && key != "BACKSPACE"
                        && key != "ENTER"
                }
                _ => false,
            })
            .count() as u64;
        let run = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
        prop_assert_eq!(run.keystream_drawn, expected);
    }

    // Collusion moves the data, not its content: LocalOnly and Collude
    // channels report identical leakage for the same trace.
    #[test]
    fn collusion_equals_local_leakage(scenario in arb_mixed_scenario()) {
        let mut local = scenario.clone();
        local.adversary = AdversaryKind::Local;
        let mut collude = scenario;
        collude.adversary = AdversaryKind::Collude;
        let run_local = replay(&local, HookSetup::AsConfigured, None).unwrap();
        let run_collude = replay(&collude, HookSetup::AsConfigured, None).unwrap();
        let leak_local =
            keyguard::analysis::compute_leakage(&run_local.truth, &run_local.captured).unwrap();
        let leak_collude =
            keyguard::analysis::compute_leakage(&run_collude.truth, &run_collude.captured)
                .unwrap();
        prop_assert_eq!(leak_local.per_field, leak_collude.per_field);
        prop_assert_eq!(leak_local.overall, leak_collude.overall);
        prop_assert!(!leak_local.exfiltrated);
        prop_assert!(leak_collude.exfiltrated);
    }

    // The matcher's trusted buffer mirrors the field text under any mix of
    // printables and backspaces.
    #[test]
    fn matcher_buffer_mirrors_typed_text(
        keys in prop::collection::vec(prop_oneof![
            4 => (32u8..=126).prop_map(Some),
            1 => Just(None),
        ], 0..120)
    ) {
        let mut matcher = RuleMatcher::new(vec![Rule {
            rule_id: "r".into(),
            prefix: "abc".into(),
            total_length: 8,
        }])
        .unwrap();
        let mut reference = Vec::new();
        for (i, k) in keys.iter().enumerate() {
            match k {
                Some(c) => {
                    matcher.feed("f", KeyCode::Printable(*c), i as u64);
                    reference.push(*c);
                }
                None => {
                    matcher.feed("f", KeyCode::BACKSPACE, i as u64);
                    reference.pop();
                }
            }
        }
        prop_assert_eq!(matcher.buffer("f"), reference.as_slice());
    }
}

// Deterministic (non-proptest) integration checks.

#[test]
fn batched_run_still_restores_editor() {
    let scenario = Scenario {
        fields: vec![FieldDecl {
            id: "notes".into(),
            input_class: InputClass::PlainText,
            marked: false,
        }],
        rules: vec![Rule {
            rule_id: "r".into(),
            prefix: "abc".into(),
            total_length: 8,
        }],
        key_hex: KEY_HEX.into(),
        keyguard_enabled: true,
        batching: BatchingConfig::Count(4),
        adversary: AdversaryKind::Local,
        trace: "abcde123"
            .chars()
            .map(|c| TraceStep::Key {
                field: "notes".into(),
                key: c.to_string(),
            })
            .collect(),
    };
    let run = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
    assert_eq!(run.editors["notes"], "abcde123");
    assert_eq!(run.keystream_drawn, 8); // whole confirming batch + span
    assert!(!run.desync);
}

#[test]
fn paired_baseline_differs_exactly_at_sensitive_positions() {
    let scenario = Scenario::example_password("pw", "hunter2", KEY_HEX);
    let on = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
    let off = replay(&scenario, HookSetup::EmptyRegistry, None).unwrap();
    let diff = compare_passthrough(&on, &off).unwrap();
    assert!(!diff.identical);
    // "Key" draws no ks % 95 == 0 byte in the first 7, so every position differs
    assert_eq!(diff.log_differences, 7);
    // but both editors hold the real password
    assert!(diff.editor_differences.is_empty());
    assert_eq!(on.editors["pw"], "hunter2");
    assert_eq!(off.editors["pw"], "hunter2");
}

#[test]
fn trace_mismatch_is_rejected() {
    let a = replay(
        &Scenario::example_password("pw", "aa", KEY_HEX),
        HookSetup::AsConfigured,
        None,
    )
    .unwrap();
    let b = replay(
        &Scenario::example_password("pw", "ab", KEY_HEX),
        HookSetup::AsConfigured,
        None,
    )
    .unwrap();
    assert!(matches!(
        compare_passthrough(&a, &b),
        Err(keyguard::Error::TraceMismatch)
    ));
}

#[test]
fn self_comparison_is_empty_diff() {
    let scenario = Scenario::example_password("pw", "hunter2", KEY_HEX);
    let a = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
    let b = replay(&scenario, HookSetup::AsConfigured, None).unwrap();
    let diff = compare_passthrough(&a, &b).unwrap();
    assert!(diff.identical);
    assert_eq!(diff.log_differences, 0);
}
