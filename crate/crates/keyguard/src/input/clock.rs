//! Deterministic virtual clock, advanced only by explicit ticks driven by
//! trace timestamps.

/// Virtual milliseconds since the start of the run.
#[derive(Debug, Clone, Default)]
pub struct VirtualClock {
    now_ms: u64,
}

impl VirtualClock {
    pub fn new() -> VirtualClock {
        VirtualClock { now_ms: 0 }
    }

    pub fn now(&self) -> u64 {
        self.now_ms
    }

    pub fn advance(&mut self, ms: u64) {
        self.now_ms += ms;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zero_and_accumulates() {
        let mut clock = VirtualClock::new();
        assert_eq!(clock.now(), 0);
        clock.advance(10);
        clock.advance(40);
        assert_eq!(clock.now(), 50);
    }
}
