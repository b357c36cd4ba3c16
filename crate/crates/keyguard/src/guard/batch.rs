//! Keystroke batching: delay forwarding events to the IME by an event count
//! or a virtual-time window so classification can act on more context
//! before the IME sees anything.

use crate::guard::SensitivityReason;
use crate::input::KeyEvent;

/// How a window closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchWindow {
    Count(usize),
    /// Virtual milliseconds from the first held event.
    Time(u64),
}

/// An event held back with its arrival-time context snapshot. Rule
/// classification stays unresolved until the batch flushes.
#[derive(Debug, Clone)]
pub struct HeldEvent {
    pub ev: KeyEvent,
    /// Password/marked sensitivity captured when the key arrived.
    pub ctx_reason: Option<SensitivityReason>,
}

#[derive(Debug, Clone)]
pub enum BatchInput {
    Arrival(HeldEvent),
    Tick(u64),
}

#[derive(Debug, Clone)]
pub struct Batcher {
    window: BatchWindow,
    held: Vec<HeldEvent>,
    batch_start: Option<u64>,
}

impl Batcher {
    pub fn new(window: BatchWindow) -> Batcher {
        Batcher {
            window,
            held: Vec::new(),
            batch_start: None,
        }
    }

    fn deadline(&self) -> Option<u64> {
        match (self.window, self.batch_start) {
            (BatchWindow::Time(ms), Some(start)) => Some(start + ms),
            _ => None,
        }
    }

    /// Feeds one input; returns the batch to release now (possibly empty),
    /// in arrival order.
    pub fn step(&mut self, input: BatchInput) -> Vec<HeldEvent> {
        match input {
            BatchInput::Arrival(h) => {
                // An arrival at or past the deadline closes the old window
                // first; the new event starts the next one.
                let mut released = Vec::new();
                if let Some(deadline) = self.deadline() {
                    if h.ev.t >= deadline && !self.held.is_empty() {
                        released = self.flush();
                    }
                }
                if self.held.is_empty() {
                    self.batch_start = Some(h.ev.t);
                }
                self.held.push(h);
                if let BatchWindow::Count(n) = self.window {
                    if self.held.len() >= n {
                        released.extend(self.flush());
                    }
                }
                released
            }
            BatchInput::Tick(now) => match self.deadline() {
                Some(deadline) if now >= deadline && !self.held.is_empty() => self.flush(),
                _ => Vec::new(),
            },
        }
    }

    /// Releases everything held, preserving arrival order.
    pub fn flush(&mut self) -> Vec<HeldEvent> {
        self.batch_start = None;
        std::mem::take(&mut self.held)
    }

    pub fn held_len(&self) -> usize {
        self.held.len()
    }
}
