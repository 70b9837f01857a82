//! Beaconing: the receiver advertises itself periodically and every charger
//! that hears it powers on until the advertisements stop.

use super::{EtxMode, EtxOutput, EtxState, EtxTimer, Message, PowerChange};
use crate::model::{NodeId, ProtocolParams};
use crate::time::SimTime;

/// Periodic receiver beacon. Stateless: always emits one broadcast REQ_CRG.
pub fn erx_on_ping_timeout(erx: NodeId) -> Vec<Message> {
    vec![Message::req_crg(erx)]
}

/// REQ_CRG that already passed the RSSI filter.
pub fn etx_on_req_crg(state: &mut EtxState, from: NodeId, now: SimTime, params: &ProtocolParams) -> EtxOutput {
    let mut out = EtxOutput::default();
    if state.mode != EtxMode::On {
        state.mode = EtxMode::On;
        out.power = Some(PowerChange::On);
    }
    state.peer = Some(from);
    state.arm(EtxTimer::CrgReqTimeout, now + ProtocolParams::dur(params.t_crgreq_timeout), &mut out.armed);
    out
}

/// No REQ_CRG for `t_crgreq_timeout` while ON.
pub fn etx_on_crgreq_timeout(state: &mut EtxState) -> EtxOutput {
    let mut out = EtxOutput::default();
    if state.mode == EtxMode::On {
        state.go_off();
        out.power = Some(PowerChange::Off);
    } else {
        out.ignored = Some("crgreq timeout while not ON");
    }
    out
}
