//! A minimal method-interception layer: named dispatch points where
//! registered hooks run before, after, or in place of the base operation,
//! with argument mutation.
//!
//! The registry is generic over the run context `C` so the pipeline can
//! thread its world state through hooks while tests use whatever context
//! they like. Hook closures may also capture their own state (counters,
//! probes) directly.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::input::{CommitAction, KeyDispatch, SelectionUpdate};

/// The two functions the prototype intercepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HookPoint {
    OnKey,
    OnUpdateSelection,
}

impl HookPoint {
    pub fn name(&self) -> &'static str {
        match self {
            HookPoint::OnKey => "onKey",
            HookPoint::OnUpdateSelection => "onUpdateSelection",
        }
    }
}

/// Argument record for a dispatch; the shape must match the point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HookArgs {
    Key(KeyDispatch),
    Selection(SelectionUpdate),
}

impl HookArgs {
    pub fn point(&self) -> HookPoint {
        match self {
            HookArgs::Key(_) => HookPoint::OnKey,
            HookArgs::Selection(_) => HookPoint::OnUpdateSelection,
        }
    }
}

/// What a base operation (or a replace hook) produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DispatchOutcome {
    Commit(CommitAction),
    Unit,
}

pub type BeforeFn<C> = Box<dyn FnMut(&mut HookArgs, &mut C) -> Result<()>>;
pub type AfterFn<C> = Box<dyn FnMut(&HookArgs, &DispatchOutcome, &mut C) -> Result<()>>;
pub type ReplaceFn<C> = Box<dyn FnMut(&mut HookArgs, &mut C) -> Result<DispatchOutcome>>;

struct PointHooks<C> {
    before: Vec<(String, BeforeFn<C>)>,
    after: Vec<(String, AfterFn<C>)>,
    replace: Option<(String, ReplaceFn<C>)>,
}

impl<C> Default for PointHooks<C> {
    fn default() -> Self {
        PointHooks {
            before: Vec::new(),
            after: Vec::new(),
            replace: None,
        }
    }
}

/// Per-point ordered Before/After lists plus an optional Replace.
/// Execution order equals registration order.
pub struct HookRegistry<C> {
    ids: BTreeSet<String>,
    on_key: PointHooks<C>,
    on_update_selection: PointHooks<C>,
}

impl<C> Default for HookRegistry<C> {
    fn default() -> Self {
        HookRegistry {
            ids: BTreeSet::new(),
            on_key: PointHooks::default(),
            on_update_selection: PointHooks::default(),
        }
    }
}

impl<C> HookRegistry<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn claim_id(&mut self, hook_id: &str) -> Result<()> {
        if !self.ids.insert(hook_id.to_string()) {
            return Err(Error::DuplicateHookId(hook_id.to_string()));
        }
        Ok(())
    }

    fn point_mut(&mut self, point: HookPoint) -> &mut PointHooks<C> {
        match point {
            HookPoint::OnKey => &mut self.on_key,
            HookPoint::OnUpdateSelection => &mut self.on_update_selection,
        }
    }

    pub fn register_before(
        &mut self,
        point: HookPoint,
        hook_id: &str,
        hook: BeforeFn<C>,
    ) -> Result<()> {
        self.claim_id(hook_id)?;
        self.point_mut(point).before.push((hook_id.to_string(), hook));
        Ok(())
    }

    pub fn register_after(
        &mut self,
        point: HookPoint,
        hook_id: &str,
        hook: AfterFn<C>,
    ) -> Result<()> {
        self.claim_id(hook_id)?;
        self.point_mut(point).after.push((hook_id.to_string(), hook));
        Ok(())
    }

    /// At most one replace hook per point.
    pub fn register_replace(
        &mut self,
        point: HookPoint,
        hook_id: &str,
        hook: ReplaceFn<C>,
    ) -> Result<()> {
        if self.point_mut(point).replace.is_some() {
            return Err(Error::ReplaceAlreadySet {
                point: point.name(),
            });
        }
        self.claim_id(hook_id)?;
        self.point_mut(point).replace = Some((hook_id.to_string(), hook));
        Ok(())
    }
}

/// Runs one interception cycle at `point`: all Before hooks in registration
/// order (each seeing earlier mutations), then the Replace hook instead of
/// `base` if one is set, then all After hooks with the outcome read-only.
///
/// The first error from any hook or the base aborts the cycle; the
/// remaining hooks are skipped for this event.
pub fn dispatch<C>(
    registry: &mut HookRegistry<C>,
    point: HookPoint,
    args: &mut HookArgs,
    ctx: &mut C,
    base: impl FnOnce(&mut HookArgs, &mut C) -> Result<DispatchOutcome>,
) -> Result<DispatchOutcome> {
    if args.point() != point {
        return Err(Error::ArgShapeMismatch { point: point.name() });
    }
    let hooks = registry.point_mut(point);
    for (_, hook) in hooks.before.iter_mut() {
        hook(args, ctx)?;
    }
    let outcome = match hooks.replace.as_mut() {
        Some((_, replace)) => replace(args, ctx)?,
        None => base(args, ctx)?,
    };
    for (_, hook) in hooks.after.iter_mut() {
        hook(args, &outcome, ctx)?;
    }
    Ok(outcome)
}
