//! Suboptimality ratios and time-to-accuracy.

use scsg::RunTrace;

use crate::error::{BenchError, Result};

/// Accuracy levels reported in summaries.
pub const EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// `(F − F*) / (F0 − F*)`; errors when `F0 <= F*`.
pub fn suboptimality_ratio(objective: f64, f_star: f64, f0: f64) -> Result<f64> {
    let denom = f0 - f_star;
    if denom.is_nan() || denom <= 0.0 {
        return Err(BenchError::UndefinedRatio { f0, f_star });
    }
    Ok((objective - f_star) / denom)
}

/// First index from which every ratio stays `<= eps`.
pub fn first_stable_index(ratios: &[f64], eps: f64) -> Option<usize> {
    let mut start = None;
    for (i, r) in ratios.iter().enumerate() {
        if *r <= eps {
            start.get_or_insert(i);
        } else {
            start = None;
        }
    }
    start
}

/// Effective passes at the first sample after which the trace never
/// leaves the `eps` level again; `None` if it never settles below it.
pub fn time_to_accuracy(trace: &RunTrace, f_star: f64, f0: f64, eps: f64) -> Result<Option<f64>> {
    let ratios = trace
        .samples()
        .iter()
        .map(|s| suboptimality_ratio(s.objective, f_star, f0))
        .collect::<Result<Vec<f64>>>()?;
    Ok(first_stable_index(&ratios, eps).map(|i| trace.passes(&trace.samples()[i])))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn trace(objectives: &[f64]) -> RunTrace {
        let mut t = RunTrace::new("t", 0, 10, BTreeMap::new());
        for (i, f) in objectives.iter().enumerate() {
            t.record(10 * i as u64, *f).unwrap();
        }
        t
    }

    #[test]
    fn later_excursion_disqualifies_an_early_crossing() {
        let t = trace(&[1.0, 0.5, 0.05, 0.2, 0.01, 0.005]);
        assert_eq!(time_to_accuracy(&t, 0.0, 1.0, 0.1).unwrap(), Some(4.0));
    }

    #[test]
    fn monotone_trace_uses_first_crossing() {
        let t = trace(&[1.0, 0.3, 0.09, 0.01]);
        assert_eq!(time_to_accuracy(&t, 0.0, 1.0, 0.1).unwrap(), Some(2.0));
        assert_eq!(time_to_accuracy(&t, 0.0, 1.0, 1.0).unwrap(), Some(0.0));
    }

    #[test]
    fn never_reached() {
        let t = trace(&[1.0, 0.5, 0.2]);
        assert_eq!(time_to_accuracy(&t, 0.0, 1.0, 0.1).unwrap(), None);
        let t = trace(&[1.0, 0.05, 0.2]);
        assert_eq!(time_to_accuracy(&t, 0.0, 1.0, 0.1).unwrap(), None);
    }

    #[test]
    fn shifted_optimum() {
        let t = trace(&[3.0, 2.5, 2.1, 2.01]);
        assert_eq!(time_to_accuracy(&t, 2.0, 3.0, 0.1).unwrap(), Some(3.0));
    }

    #[test]
    fn undefined_when_start_is_optimal() {
        let t = trace(&[1.0, 1.0]);
        assert!(matches!(time_to_accuracy(&t, 1.0, 1.0, 0.1), Err(BenchError::UndefinedRatio { .. })));
        assert!(time_to_accuracy(&t, 2.0, 1.0, 0.1).is_err());
    }
}
