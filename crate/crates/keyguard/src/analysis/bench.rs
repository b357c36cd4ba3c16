//! Hook-path latency measurement: times the onKey and onUpdateSelection
//! dispatch paths with hooks installed and with an empty registry, over
//! identical traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::runner::{replay, HookSetup};
use crate::scenario::Scenario;

/// Raw per-dispatch timings (microseconds) collected during one replay.
#[derive(Debug, Default, Clone)]
pub struct LatencyRecorder {
    pub on_key_us: Vec<f64>,
    pub on_update_us: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean_us: f64,
    pub p95_us: f64,
    pub max_us: f64,
}

impl SampleStats {
    fn from_samples(samples: &[f64]) -> SampleStats {
        if samples.is_empty() {
            return SampleStats {
                n: 0,
                mean_us: 0.0,
                p95_us: 0.0,
                max_us: 0.0,
            };
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        SampleStats {
            n,
            mean_us: sorted.iter().sum::<f64>() / n as f64,
            p95_us: sorted[(n * 95) / 100..].first().copied().unwrap_or(sorted[n - 1]),
            max_us: sorted[n - 1],
        }
    }
}

/// Hooked-vs-baseline comparison for one dispatch point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointComparison {
    pub hooked: SampleStats,
    pub baseline: SampleStats,
    /// hooked mean minus baseline mean.
    pub added_mean_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub repetitions: usize,
    pub key_events: usize,
    pub on_key: PointComparison,
    pub on_update_selection: PointComparison,
}

/// Replays the scenario `repetitions` times per mode (after one discarded
/// warmup pair), timing each dispatch. Needs at least 60 key events.
pub fn run_latency_bench(scenario: &Scenario, repetitions: usize) -> Result<LatencyStats> {
    if repetitions < 1 {
        return Err(Error::InvalidReps);
    }
    let key_events = scenario.key_event_count();
    if key_events < 60 {
        return Err(Error::TraceTooShort(key_events));
    }

    // warmup, discarded
    let mut warmup = LatencyRecorder::default();
    replay(scenario, HookSetup::AsConfigured, Some(&mut warmup))?;
    let mut warmup = LatencyRecorder::default();
    replay(scenario, HookSetup::EmptyRegistry, Some(&mut warmup))?;

    let mut hooked = LatencyRecorder::default();
    let mut baseline = LatencyRecorder::default();
    for _ in 0..repetitions {
        replay(scenario, HookSetup::AsConfigured, Some(&mut hooked))?;
        replay(scenario, HookSetup::EmptyRegistry, Some(&mut baseline))?;
    }

    let comparison = |h: &[f64], b: &[f64]| {
        let hooked = SampleStats::from_samples(h);
        let baseline = SampleStats::from_samples(b);
        let added_mean_us = hooked.mean_us - baseline.mean_us;
        PointComparison {
            hooked,
            baseline,
            added_mean_us,
        }
    };
    Ok(LatencyStats {
        repetitions,
        key_events,
        on_key: comparison(&hooked.on_key_us, &baseline.on_key_us),
        on_update_selection: comparison(&hooked.on_update_us, &baseline.on_update_us),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_from_samples() {
        let samples: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let s = SampleStats::from_samples(&samples);
        assert_eq!(s.n, 100);
        assert!((s.mean_us - 50.5).abs() < 1e-9);
        assert_eq!(s.p95_us, 96.0);
        assert_eq!(s.max_us, 100.0);
    }

    #[test]
    fn short_trace_rejected() {
        let scenario = crate::scenario::Scenario::example_password("pw", "hi", "4b6579");
        assert!(matches!(
            run_latency_bench(&scenario, 1),
            Err(Error::TraceTooShort(2))
        ));
    }

    #[test]
    fn zero_reps_rejected() {
        let scenario = crate::scenario::Scenario::example_password("pw", "hi", "4b6579");
        assert!(matches!(
            run_latency_bench(&scenario, 0),
            Err(Error::InvalidReps)
        ));
    }
}
