//! Deterministic discrete-event simulation of one receiver moving through
//! a field of chargers.
//!
//! Events are ordered by `(time, seq)`; `seq` is the insertion counter, so
//! simultaneous events run in the order they were scheduled. Packets take
//! [`DELIVERY_DELAY`] to arrive. The receiver's load voltage is sampled
//! every [`SAMPLE_PERIOD`] and it is silent and unpowered while it is being
//! carried between waypoints; every timer keeps running meanwhile.

mod reference;
pub mod rng;
mod scenario;
mod schedule;
mod sim;
mod trace;

pub use reference::{reference_vector, ReferenceVector};
pub use rng::{Draws, StreamId};
pub use scenario::{EtxConfig, Scenario, ScenarioError, ScenarioMeta, Waypoint, ERX};
pub use schedule::{grid_len, Schedule, Visit};
pub use sim::{DELIVERY_DELAY, SAMPLE_PERIOD};
pub use trace::{DropReason, Record, SimTrace, TraceEntry, CSV_HEADER};

use thiserror::Error;

use crate::model::NodeId;
use crate::par::{self, Exec};
use crate::time::SimTime;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("event queue ran dry at {at} s before the end of the experiment")]
    QueueExhausted { at: SimTime },
    #[error("event at {event} s scheduled before current time {now} s")]
    Causality { event: SimTime, now: SimTime },
    #[error("replayed draws ran out")]
    ReplayExhausted,
    #[error("message addressed to unknown node {0}")]
    UnknownNode(NodeId),
}

impl EngineError {
    /// Whether the failure is the caller's input rather than a bug.
    pub fn is_validation(&self) -> bool {
        matches!(self, EngineError::Scenario(_))
    }
}

/// Runs the scenario with draws from its own seed.
pub fn run(sc: &Scenario) -> Result<SimTrace, EngineError> {
    run_with_draws(sc, &Draws::Seeded(sc.meta.seed))
}

/// Runs the scenario taking random values from `draws`; pass
/// [`SimTrace::recorded_draws`] of an earlier run to replay it.
pub fn run_with_draws(sc: &Scenario, draws: &Draws) -> Result<SimTrace, EngineError> {
    sim::Sim::new(sc, draws)?.run()
}

/// The mobility schedule a run of `sc` will follow.
pub fn schedule(sc: &Scenario) -> Result<Schedule, EngineError> {
    sc.validate()?;
    Schedule::build(sc, &mut Draws::Seeded(sc.meta.seed).source(StreamId::Mobility))
}

/// Runs independent scenarios, results in input order.
pub fn run_batch(scenarios: &[Scenario], exec: Exec) -> Vec<Result<SimTrace, EngineError>> {
    par::map(exec, scenarios, run)
}
