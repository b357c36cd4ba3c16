//! Run orchestration: builds the world (editor, adversary IME, hook
//! registry, defense state), replays a scenario trace deterministically,
//! and collects the artifacts the analysis layer consumes.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryWorld, CapturedData, Channel, LogEntry};
use crate::analysis::bench::LatencyRecorder;
use crate::analysis::{compare_passthrough, compute_leakage, GroundTruth};
use crate::error::{Error, Result};
use crate::guard::rules::RuleMatcher;
use crate::guard::{Guard, GuardConfig, SensitivityReason};
use crate::hooks::{dispatch, DispatchOutcome, HookArgs, HookPoint, HookRegistry};
use crate::input::clock::VirtualClock;
use crate::input::editor::EditorState;
use crate::input::layout::KeyboardLayout;
use crate::input::{
    ControlKey, FieldContexts, FieldId, InputClass, KeyCode, KeyDispatch, KeyEvent,
};
use crate::report::{ReportScenario, RunReport};
use crate::scenario::{Scenario, TraceStep};

/// Whether the replay installs the configured hooks or runs bare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HookSetup {
    AsConfigured,
    /// Paired-baseline mode: identical trace, empty hook registry, no
    /// defense plumbing at all.
    EmptyRegistry,
}

/// Mutable state shared by hooks and base operations during a run.
pub struct World {
    pub editor: EditorState,
    pub contexts: FieldContexts,
    pub adversary: AdversaryWorld,
    pub guard: Option<Guard>,
}

/// One row per key step: what the user typed, what the IME saw, and how the
/// keystroke was classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub field: FieldId,
    pub plaintext: String,
    /// None when a fault prevented the IME from seeing the event.
    pub ime_saw: Option<String>,
    pub sensitive: bool,
    pub reason: Option<String>,
    pub fault: Option<String>,
}

/// Everything a finished replay leaves behind.
#[derive(Debug)]
pub struct RunArtifacts {
    pub scenario_digest: String,
    pub trace_digest: String,
    pub log: Vec<LogEntry>,
    pub editors: BTreeMap<FieldId, String>,
    pub truth: GroundTruth,
    pub captured: CapturedData,
    pub audit: Vec<AuditEntry>,
    pub desync: bool,
    pub keystream_drawn: u64,
    pub update_count: u64,
}

fn install_keyguard_hooks(registry: &mut HookRegistry<World>) -> Result<()> {
    registry.register_before(
        HookPoint::OnKey,
        "keyguard-encrypt",
        Box::new(|args, world| {
            let HookArgs::Key(dispatch_args) = args else {
                return Err(Error::ArgShapeMismatch { point: "onKey" });
            };
            let ctx = world.contexts.context_or_plain(&dispatch_args.field_id);
            match world.guard.as_mut() {
                Some(guard) => guard.before_on_key(&ctx, dispatch_args).map(|_| ()),
                None => Ok(()),
            }
        }),
    )?;
    registry.register_after(
        HookPoint::OnUpdateSelection,
        "keyguard-decrypt",
        Box::new(|args, _outcome, world| {
            let HookArgs::Selection(upd) = args else {
                return Err(Error::ArgShapeMismatch {
                    point: "onUpdateSelection",
                });
            };
            let World { guard, editor, .. } = world;
            match guard.as_mut() {
                Some(g) => g.after_update_selection(editor, upd),
                None => Ok(()),
            }
        }),
    )?;
    Ok(())
}

struct EventLoop<'a> {
    registry: HookRegistry<World>,
    world: World,
    faults: BTreeMap<u64, String>,
    desync: bool,
    timing: Option<&'a mut LatencyRecorder>,
}

impl EventLoop<'_> {
    /// Pushes one key event through the full interception cycle:
    /// onKey dispatch, editor commit, onUpdateSelection dispatch. Hook
    /// errors abort the event, are recorded, and the run continues.
    fn dispatch_event(&mut self, ev: &KeyEvent) -> Result<()> {
        let mut args = HookArgs::Key(KeyDispatch::from_event(ev));
        let start = self.timing.is_some().then(Instant::now);
        let outcome = dispatch(
            &mut self.registry,
            HookPoint::OnKey,
            &mut args,
            &mut self.world,
            |args, world| {
                let HookArgs::Key(d) = args else {
                    return Err(Error::ArgShapeMismatch { point: "onKey" });
                };
                Ok(DispatchOutcome::Commit(world.adversary.on_key(d)))
            },
        );
        if let (Some(rec), Some(t0)) = (self.timing.as_deref_mut(), start) {
            rec.on_key_us.push(t0.elapsed().as_secs_f64() * 1e6);
        }
        let action = match outcome {
            Ok(DispatchOutcome::Commit(action)) => action,
            // a replace hook swallowed the event: nothing reaches the editor
            Ok(DispatchOutcome::Unit) => return Ok(()),
            Err(e) => {
                self.record_fault(ev.seq, e);
                return Ok(());
            }
        };

        let upd = self.world.editor.apply(&ev.field_id, action)?;
        let mut args = HookArgs::Selection(upd);
        let start = self.timing.is_some().then(Instant::now);
        let outcome = dispatch(
            &mut self.registry,
            HookPoint::OnUpdateSelection,
            &mut args,
            &mut self.world,
            |args, world| {
                let HookArgs::Selection(u) = args else {
                    return Err(Error::ArgShapeMismatch {
                        point: "onUpdateSelection",
                    });
                };
                world.adversary.on_update_selection(u);
                Ok(DispatchOutcome::Unit)
            },
        );
        if let (Some(rec), Some(t0)) = (self.timing.as_deref_mut(), start) {
            rec.on_update_us.push(t0.elapsed().as_secs_f64() * 1e6);
        }
        if let Err(e) = outcome {
            self.record_fault(ev.seq, e);
        }
        Ok(())
    }

    fn record_fault(&mut self, seq: u64, error: Error) {
        if error.is_desync() {
            self.desync = true;
        }
        self.faults.entry(seq).or_insert_with(|| error.to_string());
    }
}

/// Replays a validated scenario and returns the run artifacts. With
/// `EmptyRegistry` the identical trace runs without any defense plumbing,
/// giving the unhooked baseline.
pub fn replay(
    scenario: &Scenario,
    setup: HookSetup,
    timing: Option<&mut LatencyRecorder>,
) -> Result<RunArtifacts> {
    scenario.validate()?;
    let layout = KeyboardLayout::qwerty();
    let defended = scenario.keyguard_enabled && setup == HookSetup::AsConfigured;

    let mut world = World {
        editor: EditorState::new(),
        contexts: FieldContexts::new(),
        adversary: AdversaryWorld::new(scenario.adversary.ime_kind()),
        guard: None,
    };
    for decl in &scenario.fields {
        world.contexts.declare(&decl.id, decl.input_class, decl.marked);
        world.editor.create_field(&decl.id);
    }
    if defended {
        world.guard = Some(Guard::new(&GuardConfig {
            rules: scenario.rules.clone(),
            key: scenario.key_bytes()?,
            batching: scenario.batching.to_batching(),
        })?);
    }

    let mut registry: HookRegistry<World> = HookRegistry::new();
    if defended {
        install_keyguard_hooks(&mut registry)?;
    }

    let mut event_loop = EventLoop {
        registry,
        world,
        faults: BTreeMap::new(),
        desync: false,
        timing,
    };

    // Ground truth runs its own matcher over the plaintext trace, whatever
    // the defense is doing.
    let mut truth_matcher = RuleMatcher::new(scenario.rules.clone())?;
    let mut truth = GroundTruth::default();
    let mut shadow: BTreeMap<FieldId, Vec<u8>> = scenario
        .fields
        .iter()
        .map(|d| (d.id.clone(), Vec::new()))
        .collect();

    let mut clock = VirtualClock::new();
    // Traces without explicit ticks imply events 10 virtual ms apart.
    let auto_advance = !scenario.has_ticks();
    let mut seq: u64 = 0;

    for step in &scenario.trace {
        match step {
            TraceStep::Tick { tick } => {
                clock.advance(*tick);
                let released = event_loop
                    .world
                    .guard
                    .as_mut()
                    .map(|g| g.tick(clock.now()))
                    .unwrap_or_default();
                for ev in &released {
                    event_loop.dispatch_event(ev)?;
                }
            }
            TraceStep::Mark { mark, value } => {
                event_loop.world.contexts.set_marked(mark, *value);
                event_loop.world.editor.create_field(mark);
                shadow.entry(mark.clone()).or_default();
            }
            TraceStep::Key { .. } | TraceStep::Touch { .. } => {
                let (field, key) = match step {
                    TraceStep::Key { field, key } => (field, KeyCode::parse_name(key)?),
                    TraceStep::Touch { field, touch } => {
                        (field, layout.key_at(touch[0], touch[1])?)
                    }
                    _ => unreachable!(),
                };
                let ev = KeyEvent {
                    field_id: field.clone(),
                    seq,
                    key,
                    t: clock.now(),
                };

                let ctx = event_loop.world.contexts.context_or_plain(field);
                let mu = truth_matcher.feed(field, key, seq);
                let reason = if !key.is_printable() {
                    None
                } else if ctx.input_class == InputClass::PasswordText {
                    Some(SensitivityReason::PasswordContext)
                } else if ctx.user_marked {
                    Some(SensitivityReason::UserMarked)
                } else if mu.in_armed_span {
                    Some(SensitivityReason::RuleMatch)
                } else {
                    None
                };
                truth.record(seq, field, key, reason);
                for cm in &mu.confirmed {
                    for &ps in &cm.prefix_seqs {
                        truth.flag_sensitive(ps, SensitivityReason::RuleMatch);
                    }
                }
                let buf = shadow.entry(field.clone()).or_default();
                match key {
                    KeyCode::Printable(c) => buf.push(c),
                    KeyCode::Control(ControlKey::Backspace) => {
                        buf.pop();
                    }
                    KeyCode::Control(ControlKey::Enter) => {}
                }

                let released = match event_loop.world.guard.as_mut() {
                    Some(g) => g.intake(ev, &ctx),
                    None => vec![ev],
                };
                for ev in &released {
                    event_loop.dispatch_event(ev)?;
                }
                seq += 1;
                if auto_advance {
                    clock.advance(10);
                }
            }
        }
    }

    // end of trace: release any partial batch
    let released = event_loop
        .world
        .guard
        .as_mut()
        .map(|g| g.flush_remaining())
        .unwrap_or_default();
    for ev in &released {
        event_loop.dispatch_event(ev)?;
    }

    let EventLoop {
        world,
        faults,
        mut desync,
        ..
    } = event_loop;

    if let Some(g) = &world.guard {
        if !g.pending_empty() {
            desync = true;
        }
    }

    truth.final_plaintext = shadow
        .into_iter()
        .map(|(id, buf)| (id, buf.iter().map(|&b| b as char).collect()))
        .collect();

    let captured = world
        .adversary
        .collect(Channel::for_kind(scenario.adversary.ime_kind()))?;
    let audit = assemble_audit(&truth, &world.adversary.log.entries, &faults);

    Ok(RunArtifacts {
        scenario_digest: scenario.digest(),
        trace_digest: scenario.trace_digest(),
        log: world.adversary.log.entries.clone(),
        editors: world.editor.all_text(),
        truth,
        captured,
        audit,
        desync,
        keystream_drawn: world.guard.as_ref().map(|g| g.keystream_drawn()).unwrap_or(0),
        update_count: world.adversary.update_count,
    })
}

fn assemble_audit(
    truth: &GroundTruth,
    log: &[LogEntry],
    faults: &BTreeMap<u64, String>,
) -> Vec<AuditEntry> {
    let observed: BTreeMap<u64, KeyCode> = log.iter().map(|e| (e.seq, e.observed)).collect();
    truth
        .chars
        .iter()
        .map(|(seq, tc)| AuditEntry {
            seq: *seq,
            field: tc.field_id.clone(),
            plaintext: tc.key.name(),
            ime_saw: observed.get(seq).map(|k| k.name()),
            sensitive: tc.sensitive,
            reason: tc.reason.map(|r| r.to_string()),
            fault: faults.get(seq).cloned(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub paired_baseline: bool,
}

/// Runs a scenario end to end and assembles the report. The caller maps
/// `report.desync` to the process exit code.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunReport> {
    let primary = replay(scenario, HookSetup::AsConfigured, None)?;
    let passthrough = if options.paired_baseline {
        let baseline = replay(scenario, HookSetup::EmptyRegistry, None)?;
        Some(compare_passthrough(&primary, &baseline)?)
    } else {
        None
    };
    let leakage = compute_leakage(&primary.truth, &primary.captured)?;
    Ok(RunReport {
        scenario: ReportScenario {
            digest: primary.scenario_digest.clone(),
            adversary: scenario.adversary.name().to_string(),
            keyguard_enabled: scenario.keyguard_enabled,
            batching: scenario.batching.describe(),
            key_events: scenario.key_event_count() as u64,
        },
        leakage,
        passthrough,
        latency: None,
        audit: primary.audit,
        desync: primary.desync,
    })
}
