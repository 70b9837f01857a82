//! Receiver mobility: when it appears at each waypoint and when it leaves.

use crate::model::Pose;
use crate::time::{SimDuration, SimTime};

use super::rng::DrawSource;
use super::scenario::Scenario;
use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub round: u32,
    pub waypoint: usize,
    pub pose: Pose,
    pub appear: SimTime,
    /// Exclusive: the receiver is gone at this instant.
    pub depart: SimTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub visits: Vec<Visit>,
    pub dwells: Vec<SimDuration>,
    pub end: SimTime,
}

impl Schedule {
    /// Draws one dwell per (round, waypoint), in that order.
    pub fn build(sc: &Scenario, source: &mut DrawSource) -> Result<Schedule, EngineError> {
        let mut t = SimTime::ZERO;
        let mut visits = Vec::new();
        let mut dwells = Vec::new();
        for round in 0..sc.meta.rounds {
            for (waypoint, w) in sc.erx_waypoints.iter().enumerate() {
                let dwell = source.uniform(w.dwell_min_s, w.dwell_max_s).ok_or(EngineError::ReplayExhausted)?;
                dwells.push(dwell);
                let appear = t;
                let depart = t + dwell;
                visits.push(Visit { round, waypoint, pose: w.pose(), appear, depart });
                t = depart + SimDuration::from_secs_f64(w.pause_s);
            }
        }
        Ok(Schedule { visits, dwells, end: t })
    }

    /// The visit covering `t`, if the receiver is present then.
    pub fn at(&self, t: SimTime) -> Option<&Visit> {
        let i = self.visits.partition_point(|v| v.appear <= t);
        i.checked_sub(1).map(|i| &self.visits[i]).filter(|v| t < v.depart)
    }
}

/// Number of grid instants `k * period` strictly before `end`.
pub fn grid_len(end: SimTime, period: SimDuration) -> u64 {
    end.0.div_ceil(period.0)
}
