//! Per-charger ground truth for accuracy: whether each charger alone would
//! lift the load voltage over the power threshold at every grid instant.

use crate::model::NodeId;
use crate::radio::{received_power_with, rectify};
use crate::time::{SimDuration, SimTime};

use super::rng::{Draws, StreamId};
use super::schedule::{grid_len, Schedule};
use super::scenario::Scenario;
use super::sim::SAMPLE_PERIOD;
use super::EngineError;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceVector {
    pub etxs: Vec<NodeId>,
    pub period: SimDuration,
    /// `values[j][k]`: charger `j` should be on at `k * period`.
    pub values: Vec<Vec<bool>>,
}

impl ReferenceVector {
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Uses the same mobility draws as [`super::run`] with the scenario seed,
/// so the grid lines up with the trace. Pauses are always false.
pub fn reference_vector(sc: &Scenario) -> Result<ReferenceVector, EngineError> {
    sc.validate()?;
    let mut src = Draws::Seeded(sc.meta.seed).source(StreamId::Mobility);
    let schedule = Schedule::build(sc, &mut src)?;
    Ok(reference_for_schedule(sc, &schedule))
}

pub(crate) fn reference_for_schedule(sc: &Scenario, schedule: &Schedule) -> ReferenceVector {
    let n = grid_len(schedule.end, SAMPLE_PERIOD) as usize;
    let th = sc.protocol_params.v_power_threshold;
    let values = sc
        .etxs
        .iter()
        .map(|e| {
            let (pose, tx) = (e.pose(), sc.etx_tx_power(e));
            let mut cache: Option<(usize, bool)> = None;
            (0..n)
                .map(|k| {
                    let t = SimTime(k as u64 * SAMPLE_PERIOD.0);
                    let Some(v) = schedule.at(t) else { return false };
                    let idx = v.round as usize * sc.erx_waypoints.len() + v.waypoint;
                    match cache {
                        Some((i, on)) if i == idx => on,
                        _ => {
                            let p = received_power_with(tx, &pose, &v.pose, &sc.radio).unwrap_or(0.0);
                            let on = rectify(p, &sc.radio).1 > th;
                            cache = Some((idx, on));
                            on
                        }
                    }
                })
                .collect()
        })
        .collect();
    ReferenceVector { etxs: sc.etxs.iter().map(|e| e.node()).collect(), period: SAMPLE_PERIOD, values }
}
