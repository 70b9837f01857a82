//! Charging accuracy: agreement between what chargers did and what they
//! should have done.

use crate::engine::{grid_len, Record, ReferenceVector, SimTrace};
use crate::time::{SimDuration, SimTime};

use super::MetricsError;

/// Joint XNOR agreement over every charger and grid instant.
pub fn charge_accuracy(reference: &[Vec<bool>], actual: &[Vec<bool>]) -> Result<f64, MetricsError> {
    if reference.len() != actual.len() {
        return Err(MetricsError::GridMismatch(format!(
            "{} reference series vs {} actual series",
            reference.len(),
            actual.len()
        )));
    }
    let mut total = 0usize;
    let mut agree = 0usize;
    for (j, (r, a)) in reference.iter().zip(actual).enumerate() {
        if r.len() != a.len() {
            return Err(MetricsError::GridMismatch(format!("series {j}: {} vs {} samples", r.len(), a.len())));
        }
        total += r.len();
        agree += r.iter().zip(a).filter(|(x, y)| x == y).count();
    }
    if total == 0 {
        return Err(MetricsError::GridMismatch("empty series".into()));
    }
    Ok(agree as f64 / total as f64)
}

/// Power intervals `[on, off)` per charger, in `trace.etxs` order. An
/// interval still open at the end is closed at `trace.end`.
pub fn on_intervals(trace: &SimTrace) -> Vec<Vec<(SimTime, SimTime)>> {
    trace
        .etxs
        .iter()
        .map(|&id| {
            let mut out = Vec::new();
            let mut since = None;
            for e in trace.records_of(id) {
                match e.record {
                    Record::PowerOn if since.is_none() => since = Some(e.time),
                    Record::PowerOff => {
                        if let Some(t0) = since.take() {
                            out.push((t0, e.time));
                        }
                    }
                    _ => {}
                }
            }
            if let Some(t0) = since {
                out.push((t0, trace.end));
            }
            out
        })
        .collect()
}

/// Each charger's power state sampled on the trace's grid.
pub fn on_series(trace: &SimTrace) -> Vec<Vec<bool>> {
    series_on_grid(&on_intervals(trace), trace.end, trace.sample_period)
}

pub(crate) fn series_on_grid(intervals: &[Vec<(SimTime, SimTime)>], end: SimTime, period: SimDuration) -> Vec<Vec<bool>> {
    let n = grid_len(end, period);
    intervals
        .iter()
        .map(|iv| {
            let mut it = iv.iter().peekable();
            (0..n)
                .map(|k| {
                    let t = SimTime(k * period.0);
                    while it.peek().is_some_and(|&&(_, off)| off <= t) {
                        it.next();
                    }
                    it.peek().is_some_and(|&&(on, _)| on <= t)
                })
                .collect()
        })
        .collect()
}

pub fn trace_accuracy(trace: &SimTrace, reference: &ReferenceVector) -> Result<f64, MetricsError> {
    if reference.etxs != trace.etxs || reference.period != trace.sample_period {
        return Err(MetricsError::GridMismatch("reference and trace describe different chargers or grids".into()));
    }
    charge_accuracy(&reference.values, &on_series(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mismatched_grids_rejected() {
        assert!(charge_accuracy(&[vec![true]], &[vec![true, false]]).is_err());
        assert!(charge_accuracy(&[vec![true]], &[]).is_err());
    }

    #[test]
    fn half_and_half() {
        let r = vec![vec![true, true], vec![false, false]];
        let a = vec![vec![true, false], vec![true, false]];
        assert_eq!(charge_accuracy(&r, &a).unwrap(), 0.5);
    }

    #[test]
    fn grid_sampling_of_intervals() {
        let p = SimDuration::from_millis(100);
        let iv = vec![vec![(SimTime(100_000), SimTime(250_000)), (SimTime(400_000), SimTime(500_000))]];
        let s = series_on_grid(&iv, SimTime(600_000), p);
        assert_eq!(s[0], vec![false, true, true, false, true, false]);
    }

    proptest! {
        #[test]
        fn identity_and_complement(x in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 1..60), 1..5)) {
            let len = x[0].len();
            let x: Vec<Vec<bool>> = x.into_iter().map(|mut v| { v.resize(len, false); v }).collect();
            let not_x: Vec<Vec<bool>> = x.iter().map(|v| v.iter().map(|b| !b).collect()).collect();
            prop_assert_eq!(charge_accuracy(&x, &x).unwrap(), 1.0);
            prop_assert_eq!(charge_accuracy(&x, &not_x).unwrap(), 0.0);
        }
    }
}
