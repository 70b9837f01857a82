use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::{NodeId, Pose, ProtocolParams};
use crate::protocols::{
    beaconing, probing, Destination, ErxOutput, ErxState, ErxTimer, EtxMode, EtxOutput, EtxState, EtxTimer,
    Message, MessageKind, PowerChange, Protocol,
};
use crate::radio::{received_power_with, rectify, rssi_dbm};
use crate::time::{SimDuration, SimTime};

use super::rng::{DrawSource, Draws, Recording, StreamId};
use super::schedule::Schedule;
use super::scenario::{Scenario, ERX};
use super::trace::{DropReason, Record, SimTrace, TraceEntry};
use super::EngineError;

/// Voltage sampling period.
pub const SAMPLE_PERIOD: SimDuration = SimDuration::from_millis(100);
/// Air plus processing time of every packet.
pub const DELIVERY_DELAY: SimDuration = SimDuration::from_millis(1);

#[derive(Debug, Clone, PartialEq)]
enum EventKind {
    EtxTimer { etx: usize, timer: EtxTimer },
    ErxTimer(ErxTimer),
    Ping,
    Deliver { msg: Message, to: NodeId, rssi_dbm: Option<f64> },
    Sample,
    Appear(usize),
    Depart(usize),
    End,
}

#[derive(Debug)]
struct Event {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

struct Etx {
    state: EtxState,
    pose: Pose,
    tx_power_w: f64,
    threshold_dbm: f64,
    powered: bool,
    draws: DrawSource,
}

pub(super) struct Sim<'a> {
    sc: &'a Scenario,
    params: &'a ProtocolParams,
    protocol: Protocol,
    now: SimTime,
    seq: u64,
    queue: BinaryHeap<Reverse<Event>>,
    etxs: Vec<Etx>,
    erx: ErxState,
    erx_pose: Option<Pose>,
    schedule: Schedule,
    /// Receiver charging-band input and rectifier output, kept current.
    rx: (f64, f64, f64),
    entries: Vec<TraceEntry>,
}

impl<'a> Sim<'a> {
    pub(super) fn new(sc: &'a Scenario, draws: &Draws) -> Result<Sim<'a>, EngineError> {
        sc.validate()?;
        let mut mobility = draws.source(StreamId::Mobility);
        let schedule = Schedule::build(sc, &mut mobility)?;
        let etxs = sc
            .etxs
            .iter()
            .map(|e| Etx {
                state: EtxState::new(e.node()),
                pose: e.pose(),
                tx_power_w: sc.etx_tx_power(e),
                threshold_dbm: sc.etx_threshold(e),
                powered: false,
                draws: draws.source(StreamId::Node(e.node())),
            })
            .collect();
        let mut sim = Sim {
            sc,
            params: &sc.protocol_params,
            protocol: sc.meta.protocol,
            now: SimTime::ZERO,
            seq: 0,
            queue: BinaryHeap::new(),
            etxs,
            erx: ErxState::new(ERX),
            erx_pose: None,
            schedule,
            rx: (0.0, 0.0, 0.0),
            entries: Vec::new(),
        };
        for d in sim.schedule.dwells.clone() {
            sim.record(None, Record::Draw { value: d });
        }
        // Mobility first so that a move precedes any same-instant sample.
        for i in 0..sim.schedule.visits.len() {
            let v = sim.schedule.visits[i];
            sim.push(v.appear, EventKind::Appear(i));
            sim.push(v.depart, EventKind::Depart(i));
        }
        sim.push(sim.schedule.end, EventKind::End);
        sim.push(SimTime::ZERO, EventKind::Sample);

        match sim.protocol {
            Protocol::Freerun => {
                for i in 0..sim.etxs.len() {
                    sim.set_etx_mode(i, EtxMode::On);
                    sim.set_power(i, true);
                }
            }
            Protocol::Beaconing | Protocol::Probing => {
                let mut src = draws.source(StreamId::Node(ERX));
                let phase = src.uniform(0.0, sim.params.t_ping).ok_or(EngineError::ReplayExhausted)?;
                sim.record(Some(ERX), Record::Draw { value: phase });
                let at = SimTime::ZERO + phase;
                if at < sim.schedule.end {
                    sim.push(at, EventKind::Ping);
                }
            }
        }
        Ok(sim)
    }

    pub(super) fn run(mut self) -> Result<SimTrace, EngineError> {
        loop {
            let Some(Reverse(ev)) = self.queue.pop() else {
                return Err(EngineError::QueueExhausted { at: self.now });
            };
            if ev.time < self.now {
                return Err(EngineError::Causality { event: ev.time, now: self.now });
            }
            self.now = ev.time;
            match ev.kind {
                EventKind::End => {
                    self.record(None, Record::End);
                    break;
                }
                EventKind::Appear(i) => self.on_appear(i),
                EventKind::Depart(i) => self.on_depart(i),
                EventKind::Sample => self.on_sample()?,
                EventKind::Ping => self.on_ping(),
                EventKind::Deliver { msg, to, rssi_dbm } => self.on_deliver(msg, to, rssi_dbm)?,
                EventKind::EtxTimer { etx, timer } => self.on_etx_timer(etx, timer)?,
                EventKind::ErxTimer(timer) => self.on_erx_timer(timer),
            }
        }
        Ok(SimTrace {
            protocol: self.protocol,
            entries: self.entries,
            end: self.schedule.end,
            sample_period: SAMPLE_PERIOD,
            etxs: self.etxs.iter().map(|e| e.state.id).collect(),
            erx: ERX,
        })
    }

    fn push(&mut self, time: SimTime, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Reverse(Event { time, seq: self.seq, kind }));
    }

    fn record(&mut self, node: Option<NodeId>, record: Record) {
        self.entries.push(TraceEntry { time: self.now, node, record });
    }

    fn set_etx_mode(&mut self, i: usize, to: EtxMode) {
        let from = self.etxs[i].state.mode;
        self.etxs[i].state.mode = to;
        if from != to {
            let id = self.etxs[i].state.id;
            self.record(Some(id), Record::EtxMode { from, to });
        }
    }

    fn set_power(&mut self, i: usize, on: bool) {
        if self.etxs[i].powered == on {
            return;
        }
        self.etxs[i].powered = on;
        let id = self.etxs[i].state.id;
        self.record(Some(id), if on { Record::PowerOn } else { Record::PowerOff });
        self.refresh_rx();
    }

    /// Recomputes the receiver's charging input after a power or position
    /// change and logs it if it moved.
    fn refresh_rx(&mut self) {
        let p_in = match self.erx_pose {
            None => 0.0,
            Some(erx) => self
                .etxs
                .iter()
                .filter(|e| e.powered)
                .map(|e| received_power_with(e.tx_power_w, &e.pose, &erx, &self.sc.radio).unwrap_or(0.0))
                .fold(0.0, |acc, p| acc + p),
        };
        if p_in != self.rx.0 {
            let (p_harvested, v_load) = rectify(p_in, &self.sc.radio);
            self.rx = (p_in, p_harvested, v_load);
            self.record(Some(ERX), Record::RxPower { p_in, p_harvested, v_load });
        }
    }

    fn on_appear(&mut self, i: usize) {
        let v = self.schedule.visits[i];
        self.erx_pose = Some(v.pose);
        self.record(Some(ERX), Record::Appear { round: v.round, waypoint: v.waypoint, pose: v.pose });
        self.refresh_rx();
    }

    fn on_depart(&mut self, i: usize) {
        let v = self.schedule.visits[i];
        self.erx_pose = None;
        self.record(Some(ERX), Record::Depart { round: v.round, waypoint: v.waypoint });
        self.refresh_rx();
    }

    fn on_sample(&mut self) -> Result<(), EngineError> {
        let (_, p_harvested, v_load) = self.rx;
        if self.erx_pose.is_some() {
            self.record(Some(ERX), Record::Sample { v_load, p_harvested });
        }
        if self.protocol == Protocol::Probing {
            let before = self.erx.mode;
            if let Some(out) = probing::erx_sample(&mut self.erx, v_load, self.now, self.params) {
                self.apply_erx(before, out, "voltage threshold");
            }
        }
        let next = self.now + SAMPLE_PERIOD;
        if next < self.schedule.end {
            self.push(next, EventKind::Sample);
        }
        Ok(())
    }

    fn on_ping(&mut self) {
        match self.protocol {
            Protocol::Beaconing => {
                for msg in beaconing::erx_on_ping_timeout(ERX) {
                    self.send_from_erx(msg);
                }
            }
            Protocol::Probing => {
                let before = self.erx.mode;
                let out = probing::erx_handle(&mut self.erx, probing::ErxEvent::PingTimeout, self.now, self.params);
                self.apply_erx(before, out, "ping");
            }
            Protocol::Freerun => {}
        }
        let next = self.now + ProtocolParams::dur(self.params.t_ping);
        if next < self.schedule.end {
            self.push(next, EventKind::Ping);
        }
    }

    fn send_from_erx(&mut self, msg: Message) {
        let Some(erx_pose) = self.erx_pose else {
            self.record(Some(ERX), Record::Dropped { msg, reason: DropReason::SenderAbsent, rssi_dbm: None });
            return;
        };
        self.record(Some(ERX), Record::Sent { msg });
        for i in 0..self.etxs.len() {
            let id = self.etxs[i].state.id;
            if let Destination::Unicast(dst) = msg.dst {
                if dst != id {
                    continue;
                }
            }
            let rssi = rssi_dbm(&erx_pose, &self.etxs[i].pose, &self.sc.radio).unwrap_or(f64::NEG_INFINITY);
            if rssi < self.etxs[i].threshold_dbm {
                self.record(Some(id), Record::Dropped { msg, reason: DropReason::BelowThreshold, rssi_dbm: Some(rssi) });
            } else {
                self.push(self.now + DELIVERY_DELAY, EventKind::Deliver { msg, to: id, rssi_dbm: Some(rssi) });
            }
        }
    }

    fn send_from_etx(&mut self, msg: Message) {
        self.record(Some(msg.src), Record::Sent { msg });
        self.push(self.now + DELIVERY_DELAY, EventKind::Deliver { msg, to: ERX, rssi_dbm: None });
    }

    fn etx_index(&self, id: NodeId) -> Option<usize> {
        self.etxs.iter().position(|e| e.state.id == id)
    }

    fn on_deliver(&mut self, msg: Message, to: NodeId, rssi: Option<f64>) -> Result<(), EngineError> {
        if to == ERX {
            if self.erx_pose.is_none() {
                self.record(Some(ERX), Record::Dropped { msg, reason: DropReason::ReceiverAbsent, rssi_dbm: None });
                return Ok(());
            }
            self.record(Some(ERX), Record::Delivered { msg, rssi_dbm: rssi });
            if self.protocol == Protocol::Probing && msg.kind == MessageKind::ReqPwr {
                let before = self.erx.mode;
                let ev = probing::ErxEvent::ReqPwr { from: msg.src };
                let out = probing::erx_handle(&mut self.erx, ev, self.now, self.params);
                self.apply_erx(before, out, "REQ_PWR");
            }
            return Ok(());
        }
        let i = self.etx_index(to).ok_or(EngineError::UnknownNode(to))?;
        self.record(Some(to), Record::Delivered { msg, rssi_dbm: rssi });
        match (self.protocol, msg.kind) {
            (Protocol::Beaconing, MessageKind::ReqCrg) => {
                let before = self.etxs[i].state.mode;
                let out = beaconing::etx_on_req_crg(&mut self.etxs[i].state, msg.src, self.now, self.params);
                self.apply_etx(i, before, out, Vec::new(), "REQ_CRG");
            }
            (Protocol::Probing, MessageKind::ReqCrg) => {
                self.probing_etx(i, probing::EtxEvent::ReqCrg { from: msg.src }, "REQ_CRG")?;
            }
            (Protocol::Probing, MessageKind::RepPwr) => {
                if let Some(report) = msg.report {
                    self.probing_etx(i, probing::EtxEvent::RepPwr { from: msg.src, report }, "REP_PWR")?;
                }
            }
            _ => self.record(Some(to), Record::Ignored { what: msg.kind.as_str().into(), reason: "not handled by protocol" }),
        }
        Ok(())
    }

    fn probing_etx(&mut self, i: usize, ev: probing::EtxEvent, what: &str) -> Result<(), EngineError> {
        let before = self.etxs[i].state.mode;
        let now = self.now;
        let etx = &mut self.etxs[i];
        let mut rec = Recording { source: &mut etx.draws, drawn: Vec::new(), exhausted: false };
        let out = probing::etx_handle(&mut etx.state, ev, now, self.params, &mut rec);
        if rec.exhausted {
            return Err(EngineError::ReplayExhausted);
        }
        let drawn = rec.drawn;
        self.apply_etx(i, before, out, drawn, what);
        Ok(())
    }

    fn on_etx_timer(&mut self, i: usize, timer: EtxTimer) -> Result<(), EngineError> {
        if !self.etxs[i].state.take_due(timer, self.now) {
            return Ok(());
        }
        let what = timer.to_string();
        match self.protocol {
            Protocol::Beaconing => {
                let before = self.etxs[i].state.mode;
                let out = beaconing::etx_on_crgreq_timeout(&mut self.etxs[i].state);
                self.apply_etx(i, before, out, Vec::new(), &what);
            }
            Protocol::Probing => {
                let ev = match timer {
                    EtxTimer::RandWait => probing::EtxEvent::RandWaitElapsed,
                    EtxTimer::PwrProbeRsp => probing::EtxEvent::PwrProbeRspTimeout,
                    EtxTimer::TurnOff => probing::EtxEvent::TurnOffTimeout,
                    EtxTimer::PwrProbe => probing::EtxEvent::PwrProbeTimeout,
                    EtxTimer::CrgReqTimeout => return Ok(()),
                };
                self.probing_etx(i, ev, &what)?;
            }
            Protocol::Freerun => {}
        }
        Ok(())
    }

    fn on_erx_timer(&mut self, timer: ErxTimer) {
        if !self.erx.take_due(timer, self.now) {
            return;
        }
        let ev = match timer {
            ErxTimer::WaitForPwr => probing::ErxEvent::WaitForPwrTimeout,
            ErxTimer::PwrProbe => probing::ErxEvent::PwrProbeTimeout,
            ErxTimer::RmvLast => probing::ErxEvent::RemoveOldestProbeSender,
        };
        let before = self.erx.mode;
        let out = probing::erx_handle(&mut self.erx, ev, self.now, self.params);
        self.apply_erx(before, out, &timer.to_string());
    }

    fn apply_etx(&mut self, i: usize, before: EtxMode, out: EtxOutput, drawn: Vec<SimDuration>, what: &str) {
        let id = self.etxs[i].state.id;
        let after = self.etxs[i].state.mode;
        if before != after {
            self.record(Some(id), Record::EtxMode { from: before, to: after });
        }
        for value in drawn {
            self.record(Some(id), Record::Draw { value });
        }
        match out.power {
            Some(PowerChange::On) => self.set_power(i, true),
            Some(PowerChange::Off) => self.set_power(i, false),
            None => {}
        }
        for (timer, at) in out.armed {
            self.push(at, EventKind::EtxTimer { etx: i, timer });
        }
        for msg in out.messages {
            self.send_from_etx(msg);
        }
        if let Some(reason) = out.ignored {
            self.record(Some(id), Record::Ignored { what: what.to_string(), reason });
        }
    }

    fn apply_erx(&mut self, before: crate::protocols::ErxMode, out: ErxOutput, what: &str) {
        let after = self.erx.mode;
        if before != after {
            self.record(Some(ERX), Record::ErxMode { from: before, to: after });
        }
        for (timer, at) in out.armed {
            self.push(at, EventKind::ErxTimer(timer));
        }
        for msg in out.messages {
            self.send_from_erx(msg);
        }
        if let Some(reason) = out.ignored {
            self.record(Some(ERX), Record::Ignored { what: what.to_string(), reason });
        }
    }
}
