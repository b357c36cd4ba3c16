//! A deterministic simulator of keystroke interception in a mobile input
//! pipeline, and of a defense that selectively encrypts sensitive
//! keystrokes before a third-party IME can log them.
//!
//! The pipeline models the path from touch to committed text: a keyboard
//! layout maps touches to key codes, an `onKey`-style dispatch hands each
//! key to the installed IME (here: one of three keylogger adversaries), the
//! editor commits the character, and an `onUpdateSelection`-style dispatch
//! reports the cursor move. Both dispatch points are hookable in the
//! Xposed style (before / after / replace), and the defense installs
//! exactly two hooks:
//!
//! * before `onKey`: classify the keystroke (password context, streaming
//!   rules, user marking) and rewrite sensitive printables to ciphertext
//!   using an RC4 keystream mapped onto the 95-symbol printable ring;
//! * after `onUpdateSelection`: restore the committed ciphertext character
//!   to the recorded plaintext, so the underlying app never shows encrypted
//!   text for more than an instant.
//!
//! Runs are driven by declarative [`scenario`] files and produce
//! [`report`]s quantifying exactly how much plaintext each adversary
//! captured, with optional paired-baseline comparison and hook-path latency
//! measurement.

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod guard;
pub mod hooks;
pub mod input;
pub mod report;
pub mod runner;
pub mod scenario;

pub use adversary::{AdversaryWorld, CapturedData, Channel, ImeKind};
pub use analysis::bench::{run_latency_bench, LatencyStats};
pub use analysis::{compare_passthrough, compute_leakage, GroundTruth, LeakageReport, PassthroughDiff};
pub use error::{Error, Result};
pub use guard::{Guard, GuardConfig, SensitivityDecision, SensitivityReason};
pub use hooks::{dispatch, DispatchOutcome, HookArgs, HookPoint, HookRegistry};
pub use input::{FieldContext, FieldId, InputClass, KeyCode, KeyDispatch, KeyEvent};
pub use report::{emit_report, ReportFormat, RunReport};
pub use runner::{replay, run_scenario, HookSetup, RunArtifacts, RunOptions, World};
pub use scenario::Scenario;
