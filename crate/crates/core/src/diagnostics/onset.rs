//! Spectral tail indicator and the oscillation-onset detector.

use crate::report::{OnsetKind, OnsetReport};

/// Default threshold on the tail ratio.
pub const DEFAULT_THRESHOLD: f64 = 0.1;
/// Number of consecutive samples above threshold needed to flag onset.
pub const CONSECUTIVE: usize = 3;

/// First mode index of the top third of `0..=n`.
pub fn tail_start(n: usize) -> usize {
    (n + 1) - (n + 1) / 3
}

/// Fraction of `sum c_k^2` carried by the top third of the modes.
/// Returns 0 for the zero vector.
pub fn tail_ratio(coeffs: &[f64]) -> f64 {
    let n = coeffs.len().saturating_sub(1);
    let start = tail_start(n);
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return 0.0;
    }
    coeffs[start..].iter().map(|c| c * c).sum::<f64>() / total
}

/// Accumulates energies of one radial-model state: mode `(k, i)` belongs to
/// the tail when `max(k, i)` is in the top third.
#[derive(Clone, Copy, Debug, Default)]
pub struct TailAccumulator {
    pub total: f64,
    pub tail: f64,
}

impl TailAccumulator {
    #[inline]
    pub fn add(&mut self, mode: usize, n: usize, c: f64) {
        let e = c * c;
        self.total += e;
        if mode >= tail_start(n) {
            self.tail += e;
        }
    }

    pub fn ratio(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.tail / self.total
        }
    }
}

/// Online version of [`detect_onset`].
#[derive(Clone, Debug)]
pub struct OnsetDetector {
    threshold: f64,
    run_start: Option<f64>,
    run_len: usize,
    trace: Vec<(f64, f64)>,
    fired: Option<f64>,
}

impl OnsetDetector {
    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            run_start: None,
            run_len: 0,
            trace: Vec::new(),
            fired: None,
        }
    }

    /// Records a sample; returns the onset time once it has fired. The
    /// reported time is the first sample of the triggering run.
    pub fn push(&mut self, t: f64, tau: f64) -> Option<f64> {
        self.trace.push((t, tau));
        if self.fired.is_none() {
            if tau > self.threshold {
                self.run_start.get_or_insert(t);
                self.run_len += 1;
                if self.run_len >= CONSECUTIVE {
                    self.fired = self.run_start;
                }
            } else {
                self.run_start = None;
                self.run_len = 0;
            }
        }
        self.fired
    }

    pub fn fired(&self) -> Option<f64> {
        self.fired
    }

    pub fn finish(self) -> OnsetReport {
        match self.fired {
            Some(t) => OnsetReport {
                kind: OnsetKind::TailOscillation,
                t_onset: Some(t),
                trace: self.trace,
            },
            None => OnsetReport::none(self.trace),
        }
    }

    pub fn finish_overflow(self, t: f64) -> OnsetReport {
        // an oscillation flagged before the overflow is the earlier signal
        if self.fired.is_some() {
            return self.finish();
        }
        OnsetReport {
            kind: OnsetKind::Overflow,
            t_onset: Some(t),
            trace: self.trace,
        }
    }
}

/// Scans a `(t, tau)` trace for `tau > threshold` on 3 consecutive samples.
pub fn detect_onset(trace: &[(f64, f64)], threshold: f64) -> OnsetReport {
    let mut det = OnsetDetector::new(threshold);
    for &(t, tau) in trace {
        det.push(t, tau);
    }
    det.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_mode_has_no_tail() {
        let mut c = vec![0.0; 10];
        c[1] = 1.0;
        assert_eq!(tail_ratio(&c), 0.0);
        let trace: Vec<_> = (0..10).map(|i| (i as f64, tail_ratio(&c))).collect();
        assert!(detect_onset(&trace, DEFAULT_THRESHOLD).is_none());
    }

    #[test]
    fn tail_only_energy_triggers() {
        let mut c = vec![0.0; 10];
        c[9] = 2.0;
        assert_eq!(tail_ratio(&c), 1.0);
        let trace: Vec<_> = (0..5).map(|i| (0.1 * i as f64, tail_ratio(&c))).collect();
        let rep = detect_onset(&trace, DEFAULT_THRESHOLD);
        assert_eq!(rep.kind, OnsetKind::TailOscillation);
        assert_eq!(rep.t_onset, Some(0.0));
    }

    #[test]
    fn needs_three_consecutive() {
        let trace = [(0.0, 0.2), (1.0, 0.2), (2.0, 0.05), (3.0, 0.3), (4.0, 0.3), (5.0, 0.3)];
        let rep = detect_onset(&trace, 0.1);
        assert_eq!(rep.t_onset, Some(3.0));
    }

    #[test]
    fn tail_start_splits_thirds() {
        assert_eq!(tail_start(50), 34);
        assert_eq!(tail_start(8), 6);
        assert_eq!(tail_start(7), 6);
    }
}
