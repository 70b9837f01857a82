use std::fmt;

use crate::model::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageKind {
    /// Charge request, broadcast by a receiver.
    ReqCrg,
    /// Power report request, charger to receiver.
    ReqPwr,
    /// Power report, receiver to charger.
    RepPwr,
}

impl MessageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::ReqCrg => "REQ_CRG",
            MessageKind::ReqPwr => "REQ_PWR",
            MessageKind::RepPwr => "REP_PWR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Destination {
    Broadcast,
    Unicast(NodeId),
}

/// Load voltage and the receiver's own threshold, carried by REP_PWR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    pub v_load: f64,
    pub v_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub kind: MessageKind,
    pub src: NodeId,
    pub dst: Destination,
    pub report: Option<PowerReport>,
}

impl Message {
    pub fn req_crg(src: NodeId) -> Message {
        Message { kind: MessageKind::ReqCrg, src, dst: Destination::Broadcast, report: None }
    }

    pub fn req_pwr(src: NodeId, dst: NodeId) -> Message {
        Message { kind: MessageKind::ReqPwr, src, dst: Destination::Unicast(dst), report: None }
    }

    pub fn rep_pwr(src: NodeId, dst: NodeId, report: PowerReport) -> Message {
        Message { kind: MessageKind::RepPwr, src, dst: Destination::Unicast(dst), report: Some(report) }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}->", self.kind.as_str(), self.src)?;
        match self.dst {
            Destination::Broadcast => write!(f, "*")?,
            Destination::Unicast(n) => write!(f, "{n}")?,
        }
        if let Some(r) = self.report {
            write!(f, " v={:.6} th={:.6}", r.v_load, r.v_threshold)?;
        }
        Ok(())
    }
}
