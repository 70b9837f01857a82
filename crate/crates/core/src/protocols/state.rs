use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::model::NodeId;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EtxMode {
    Off,
    On,
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EtxTimer {
    CrgReqTimeout,
    RandWait,
    PwrProbeRsp,
    TurnOff,
    PwrProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErxMode {
    Idle,
    Wait,
    Charged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErxTimer {
    WaitForPwr,
    PwrProbe,
    RmvLast,
}

impl fmt::Display for EtxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtxMode::Off => "OFF",
            EtxMode::On => "ON",
            EtxMode::Probe => "PROBE",
        })
    }
}

impl fmt::Display for ErxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErxMode::Idle => "IDLE",
            ErxMode::Wait => "WAIT",
            ErxMode::Charged => "CHARGED",
        })
    }
}

impl fmt::Display for EtxTimer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtxTimer::CrgReqTimeout => "crgreq_timeout",
            EtxTimer::RandWait => "rand_wait",
            EtxTimer::PwrProbeRsp => "pwr_probe_rsp",
            EtxTimer::TurnOff => "turn_off",
            EtxTimer::PwrProbe => "pwr_probe",
        })
    }
}

impl fmt::Display for ErxTimer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErxTimer::WaitForPwr => "wait_for_pwr",
            ErxTimer::PwrProbe => "pwr_probe",
            ErxTimer::RmvLast => "rmv_last",
        })
    }
}

/// Charger state: mode, armed deadlines and the receiver it is probing or
/// serving.
#[derive(Debug, Clone, PartialEq)]
pub struct EtxState {
    pub id: NodeId,
    pub mode: EtxMode,
    pub timers: BTreeMap<EtxTimer, SimTime>,
    pub peer: Option<NodeId>,
}

impl EtxState {
    pub fn new(id: NodeId) -> EtxState {
        EtxState { id, mode: EtxMode::Off, timers: BTreeMap::new(), peer: None }
    }

    pub fn deadline(&self, timer: EtxTimer) -> Option<SimTime> {
        self.timers.get(&timer).copied()
    }

    /// Consumes the timer if `now` is its current deadline.
    pub fn take_due(&mut self, timer: EtxTimer, now: SimTime) -> bool {
        if self.timers.get(&timer) == Some(&now) {
            self.timers.remove(&timer);
            true
        } else {
            false
        }
    }

    pub(crate) fn arm(&mut self, timer: EtxTimer, at: SimTime, armed: &mut Vec<(EtxTimer, SimTime)>) {
        self.timers.insert(timer, at);
        armed.push((timer, at));
    }

    pub(crate) fn go_off(&mut self) {
        self.mode = EtxMode::Off;
        self.timers.clear();
        self.peer = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QtxEntry {
    pub etx: NodeId,
    pub inserted: SimTime,
}

/// Receiver state. `qtx` holds recently tried chargers, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ErxState {
    pub id: NodeId,
    pub mode: ErxMode,
    pub qtx: VecDeque<QtxEntry>,
    pub current_charger: Option<NodeId>,
    /// Most recent sampled load voltage.
    pub v_load: f64,
    pub timers: BTreeMap<ErxTimer, SimTime>,
}

impl ErxState {
    pub fn new(id: NodeId) -> ErxState {
        ErxState {
            id,
            mode: ErxMode::Idle,
            qtx: VecDeque::new(),
            current_charger: None,
            v_load: 0.0,
            timers: BTreeMap::new(),
        }
    }

    pub fn deadline(&self, timer: ErxTimer) -> Option<SimTime> {
        self.timers.get(&timer).copied()
    }

    pub fn take_due(&mut self, timer: ErxTimer, now: SimTime) -> bool {
        if self.timers.get(&timer) == Some(&now) {
            self.timers.remove(&timer);
            true
        } else {
            false
        }
    }

    pub fn is_blacklisted(&self, etx: NodeId) -> bool {
        self.qtx.iter().any(|e| e.etx == etx)
    }

    pub(crate) fn arm(&mut self, timer: ErxTimer, at: SimTime, armed: &mut Vec<(ErxTimer, SimTime)>) {
        self.timers.insert(timer, at);
        armed.push((timer, at));
    }

    pub(crate) fn disarm(&mut self, timer: ErxTimer) {
        self.timers.remove(&timer);
    }
}
