//! Charge-control state machines.
//!
//! Each handler mutates a single node's state and returns the messages it
//! wants sent, timers it armed and any change to the charger's power
//! switch. Timers are stored as absolute deadlines inside the state; the
//! engine schedules a wake-up for every armed deadline and only delivers it
//! if the deadline is still current, so re-arming a timer implicitly
//! cancels the previous one.

pub mod beaconing;
pub mod probing;

mod message;
mod state;

pub use message::{Destination, Message, MessageKind, PowerReport};
pub use state::{ErxMode, ErxState, ErxTimer, EtxMode, EtxState, EtxTimer, QtxEntry};

use serde::{Deserialize, Serialize};

use crate::time::SimDuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Beaconing,
    Probing,
    Freerun,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Beaconing, Protocol::Probing, Protocol::Freerun];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Beaconing => "beaconing",
            Protocol::Probing => "probing",
            Protocol::Freerun => "freerun",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "beaconing" => Ok(Protocol::Beaconing),
            "probing" => Ok(Protocol::Probing),
            "freerun" => Ok(Protocol::Freerun),
            other => Err(format!("unknown protocol '{other}' (expected beaconing, probing or freerun)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerChange {
    On,
    Off,
}

/// Effects produced by a charger handler.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EtxOutput {
    pub messages: Vec<Message>,
    pub power: Option<PowerChange>,
    pub armed: Vec<(EtxTimer, crate::time::SimTime)>,
    /// Set when the event was not meaningful in the current mode.
    pub ignored: Option<&'static str>,
}

/// Effects produced by a receiver handler.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErxOutput {
    pub messages: Vec<Message>,
    pub armed: Vec<(ErxTimer, crate::time::SimTime)>,
    pub ignored: Option<&'static str>,
}

/// Source of the uniform back-off used before REQ_PWR.
///
/// Implemented for every [`rand::Rng`]; the engine also provides a replaying
/// source fed from a recorded trace.
pub trait RandomWait {
    fn rand_wait(&mut self, max_s: f64) -> SimDuration;
}

impl<R: rand::Rng> RandomWait for R {
    fn rand_wait(&mut self, max_s: f64) -> SimDuration {
        SimDuration::from_secs_f64(self.gen_range(0.0..max_s))
    }
}

/// The always-on benchmark: chargers never switch off and nothing is sent.
pub fn freerun_policy() -> bool {
    true
}
