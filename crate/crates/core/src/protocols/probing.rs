//! Probing: a charger that hears a charge request first asks the receiver
//! for its load voltage and only powers on if the receiver is not already
//! being charged. The receiver blacklists chargers it has tried in Q_TX.

use super::{
    ErxMode, ErxOutput, ErxState, ErxTimer, EtxMode, EtxOutput, EtxState, EtxTimer, Message, PowerChange,
    PowerReport, QtxEntry, RandomWait,
};
use crate::model::{NodeId, ProtocolParams};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErxEvent {
    PingTimeout,
    ReqPwr { from: NodeId },
    WaitForPwrTimeout,
    PwrProbeTimeout,
    VoltageAboveThreshold,
    VoltageBelowThreshold,
    RemoveOldestProbeSender,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtxEvent {
    ReqCrg { from: NodeId },
    RepPwr { from: NodeId, report: PowerReport },
    RandWaitElapsed,
    PwrProbeRspTimeout,
    TurnOffTimeout,
    PwrProbeTimeout,
}

fn report(state: &ErxState, params: &ProtocolParams) -> PowerReport {
    PowerReport { v_load: state.v_load, v_threshold: params.v_power_threshold }
}

fn rmv_last_deadline(state: &ErxState, params: &ProtocolParams) -> Option<SimTime> {
    state.qtx.front().map(|e| e.inserted + ProtocolParams::dur(params.t_rmv_last))
}

fn enqueue(state: &mut ErxState, etx: NodeId, now: SimTime, params: &ProtocolParams, armed: &mut Vec<(ErxTimer, SimTime)>) {
    let was_empty = state.qtx.is_empty();
    state.qtx.push_back(QtxEntry { etx, inserted: now });
    if was_empty {
        if let Some(at) = rmv_last_deadline(state, params) {
            state.arm(ErxTimer::RmvLast, at, armed);
        }
    }
}

/// Drops every Q_TX entry that has been stored for `t_rmv_last` or longer.
fn evict_stale(state: &mut ErxState, now: SimTime, params: &ProtocolParams, armed: &mut Vec<(ErxTimer, SimTime)>) {
    let ttl = ProtocolParams::dur(params.t_rmv_last);
    let before = state.qtx.len();
    while state.qtx.front().is_some_and(|e| e.inserted + ttl <= now) {
        state.qtx.pop_front();
    }
    if state.qtx.len() != before {
        match rmv_last_deadline(state, params) {
            Some(at) => state.arm(ErxTimer::RmvLast, at, armed),
            None => state.disarm(ErxTimer::RmvLast),
        }
    }
}

fn enter_idle(state: &mut ErxState) {
    state.mode = ErxMode::Idle;
    state.current_charger = None;
    state.disarm(ErxTimer::WaitForPwr);
    state.disarm(ErxTimer::PwrProbe);
}

/// Receiver handlers.
pub fn erx_handle(state: &mut ErxState, event: ErxEvent, now: SimTime, params: &ProtocolParams) -> ErxOutput {
    let mut out = ErxOutput::default();
    match event {
        ErxEvent::PingTimeout => {
            if state.mode == ErxMode::Idle {
                out.messages.push(Message::req_crg(state.id));
            }
        }
        ErxEvent::ReqPwr { from } => {
            evict_stale(state, now, params, &mut out.armed);
            if state.mode == ErxMode::Idle && !state.is_blacklisted(from) {
                enqueue(state, from, now, params, &mut out.armed);
                out.messages.push(Message::rep_pwr(state.id, from, report(state, params)));
                state.mode = ErxMode::Wait;
                state.current_charger = Some(from);
                state.arm(ErxTimer::WaitForPwr, now + ProtocolParams::dur(params.t_wait_for_pwr), &mut out.armed);
            } else {
                out.ignored = Some("REQ_PWR outside IDLE or from blacklisted charger");
            }
        }
        ErxEvent::WaitForPwrTimeout => {
            if state.mode == ErxMode::Wait {
                enter_idle(state);
            } else {
                out.ignored = Some("wait-for-power timeout outside WAIT");
            }
        }
        ErxEvent::PwrProbeTimeout => match (state.mode, state.current_charger) {
            (ErxMode::Charged, Some(charger)) => {
                out.messages.push(Message::rep_pwr(state.id, charger, report(state, params)));
                state.arm(ErxTimer::PwrProbe, now + ProtocolParams::dur(params.t_erx_pwr_probe), &mut out.armed);
            }
            _ => out.ignored = Some("power-probe timeout outside CHARGED"),
        },
        ErxEvent::VoltageAboveThreshold => match (state.mode, state.current_charger) {
            (ErxMode::Wait, Some(charger)) => {
                enqueue(state, charger, now, params, &mut out.armed);
                out.messages.push(Message::rep_pwr(state.id, charger, report(state, params)));
                state.mode = ErxMode::Charged;
                state.disarm(ErxTimer::WaitForPwr);
                state.arm(ErxTimer::PwrProbe, now + ProtocolParams::dur(params.t_erx_pwr_probe), &mut out.armed);
            }
            _ => out.ignored = Some("voltage rise outside WAIT"),
        },
        ErxEvent::VoltageBelowThreshold => {
            if state.mode == ErxMode::Charged {
                enter_idle(state);
            } else {
                out.ignored = Some("voltage drop outside CHARGED");
            }
        }
        ErxEvent::RemoveOldestProbeSender => evict_stale(state, now, params, &mut out.armed),
    }
    out
}

/// Feeds one voltage sample to the receiver and runs the threshold handler
/// it implies, if any. A rise is reported while waiting for power, a drop
/// while charged.
pub fn erx_sample(state: &mut ErxState, v_load: f64, now: SimTime, params: &ProtocolParams) -> Option<ErxOutput> {
    state.v_load = v_load;
    let event = match state.mode {
        ErxMode::Wait if v_load > params.v_power_threshold => ErxEvent::VoltageAboveThreshold,
        ErxMode::Charged if v_load < params.v_power_threshold => ErxEvent::VoltageBelowThreshold,
        _ => return None,
    };
    Some(erx_handle(state, event, now, params))
}

/// Charger handlers. `rng` supplies the collision-avoidance back-off.
pub fn etx_handle(
    state: &mut EtxState,
    event: EtxEvent,
    now: SimTime,
    params: &ProtocolParams,
    rng: &mut dyn RandomWait,
) -> EtxOutput {
    let mut out = EtxOutput::default();
    match event {
        EtxEvent::ReqCrg { from } => {
            if state.mode == EtxMode::Off {
                let wait = rng.rand_wait(params.t_rand_wait_max);
                state.mode = EtxMode::Probe;
                state.peer = Some(from);
                state.arm(EtxTimer::RandWait, now + wait, &mut out.armed);
            } else {
                out.ignored = Some("REQ_CRG while not OFF");
            }
        }
        EtxEvent::RandWaitElapsed => match (state.mode, state.peer) {
            (EtxMode::Probe, Some(erx)) => {
                out.messages.push(Message::req_pwr(state.id, erx));
                state.arm(EtxTimer::PwrProbeRsp, now + ProtocolParams::dur(params.t_pwr_probe_rsp), &mut out.armed);
            }
            _ => out.ignored = Some("back-off elapsed outside PROBE"),
        },
        EtxEvent::RepPwr { from, report } => {
            if state.peer != Some(from) {
                out.ignored = Some("REP_PWR from a receiver this charger is not serving");
                return out;
            }
            match state.mode {
                EtxMode::Probe => {
                    if report.v_load >= report.v_threshold {
                        state.go_off();
                    } else {
                        state.timers.clear();
                        state.mode = EtxMode::On;
                        out.power = Some(PowerChange::On);
                        state.arm(EtxTimer::TurnOff, now + ProtocolParams::dur(params.t_turn_off), &mut out.armed);
                        state.arm(EtxTimer::PwrProbe, now + ProtocolParams::dur(params.t_etx_pwr_probe), &mut out.armed);
                    }
                }
                EtxMode::On => {
                    state.timers.remove(&EtxTimer::TurnOff);
                    state.arm(EtxTimer::PwrProbe, now + ProtocolParams::dur(params.t_etx_pwr_probe), &mut out.armed);
                }
                EtxMode::Off => out.ignored = Some("REP_PWR while OFF"),
            }
        }
        EtxEvent::PwrProbeRspTimeout => {
            if state.mode == EtxMode::Probe {
                state.go_off();
            } else {
                out.ignored = Some("probe response timeout outside PROBE");
            }
        }
        EtxEvent::TurnOffTimeout | EtxEvent::PwrProbeTimeout => {
            if state.mode == EtxMode::On {
                state.go_off();
                out.power = Some(PowerChange::Off);
            } else {
                out.ignored = Some("feedback timeout outside ON");
            }
        }
    }
    out
}
