//! Simulation trace records and their CSV form.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io;

use crate::model::{NodeId, Pose};
use crate::protocols::{ErxMode, EtxMode, Message, Protocol};
use crate::time::{SimDuration, SimTime};

use super::rng::{Draws, StreamId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// Receiver-side RSSI under the charger's communication threshold.
    BelowThreshold,
    /// The receiver was between waypoints when it tried to send.
    SenderAbsent,
    /// The receiver was between waypoints when the packet arrived.
    ReceiverAbsent,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::BelowThreshold => "below_threshold",
            DropReason::SenderAbsent => "sender_absent",
            DropReason::ReceiverAbsent => "receiver_absent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    EtxMode { from: EtxMode, to: EtxMode },
    ErxMode { from: ErxMode, to: ErxMode },
    Sent { msg: Message },
    Delivered { msg: Message, rssi_dbm: Option<f64> },
    Dropped { msg: Message, reason: DropReason, rssi_dbm: Option<f64> },
    PowerOn,
    PowerOff,
    /// Load voltage on the sampling grid; only while the receiver is present.
    Sample { v_load: f64, p_harvested: f64 },
    /// Charging-band input changed at the receiver.
    RxPower { p_in: f64, p_harvested: f64, v_load: f64 },
    Appear { round: u32, waypoint: usize, pose: Pose },
    Depart { round: u32, waypoint: usize },
    /// A value taken from the node's random stream (mobility when the
    /// entry has no node).
    Draw { value: SimDuration },
    Ignored { what: String, reason: &'static str },
    End,
}

impl Record {
    pub fn kind(&self) -> &'static str {
        match self {
            Record::EtxMode { .. } | Record::ErxMode { .. } => "state",
            Record::Sent { .. } => "sent",
            Record::Delivered { .. } => "delivered",
            Record::Dropped { .. } => "dropped",
            Record::PowerOn => "power_on",
            Record::PowerOff => "power_off",
            Record::Sample { .. } => "sample",
            Record::RxPower { .. } => "rx_power",
            Record::Appear { .. } => "appear",
            Record::Depart { .. } => "depart",
            Record::Draw { .. } => "draw",
            Record::Ignored { .. } => "ignored",
            Record::End => "end",
        }
    }

    /// Free-text detail column. Never contains commas.
    pub fn detail(&self) -> String {
        let rssi = |r: &Option<f64>| r.map(|v| format!(" rssi={v:.3}")).unwrap_or_default();
        match self {
            Record::EtxMode { from, to } => format!("{from}->{to}"),
            Record::ErxMode { from, to } => format!("{from}->{to}"),
            Record::Sent { msg } => msg.to_string(),
            Record::Delivered { msg, rssi_dbm } => format!("{msg}{}", rssi(rssi_dbm)),
            Record::Dropped { msg, reason, rssi_dbm } => format!("{msg} {}{}", reason.as_str(), rssi(rssi_dbm)),
            Record::PowerOn | Record::PowerOff | Record::End => String::new(),
            Record::Sample { v_load, p_harvested } => format!("v={v_load:.6} p={p_harvested:.9}"),
            Record::RxPower { p_in, p_harvested, v_load } => {
                format!("p_in={p_in:.9} p={p_harvested:.9} v={v_load:.6}")
            }
            Record::Appear { round, waypoint, pose } => {
                format!("round={round} waypoint={waypoint} x={:.3} y={:.3}", pose.x, pose.y)
            }
            Record::Depart { round, waypoint } => format!("round={round} waypoint={waypoint}"),
            Record::Draw { value } => format!("{}", SimTime(value.0)),
            Record::Ignored { what, reason } => format!("{what}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub time: SimTime,
    pub node: Option<NodeId>,
    pub record: Record,
}

/// Append-only log of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub protocol: Protocol,
    pub entries: Vec<TraceEntry>,
    /// Experiment length T_E.
    pub end: SimTime,
    pub sample_period: SimDuration,
    pub etxs: Vec<NodeId>,
    pub erx: NodeId,
}

pub const CSV_HEADER: &str = "time_s,node,record_kind,detail";

impl SimTrace {
    pub fn records_of(&self, node: NodeId) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(move |e| e.node == Some(node))
    }

    /// Packets the receiver put on the air.
    pub fn erx_sent(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| matches!(&e.record, Record::Sent { msg } if msg.src == self.erx))
            .count() as u64
    }

    /// Packets the receiver took off the air.
    pub fn erx_received(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.node == Some(self.erx) && matches!(e.record, Record::Delivered { .. }))
            .count() as u64
    }

    /// Recorded random draws, grouped by stream, for replay.
    pub fn recorded_draws(&self) -> Draws {
        let mut map: BTreeMap<StreamId, VecDeque<SimDuration>> = BTreeMap::new();
        for e in &self.entries {
            if let Record::Draw { value } = e.record {
                let stream = e.node.map_or(StreamId::Mobility, StreamId::Node);
                map.entry(stream).or_default().push_back(value);
            }
        }
        Draws::Replay(map)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 48);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let node = e.node.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "{},{},{},{}", e.time, node, e.record.kind(), e.record.detail());
        }
        out
    }

    pub fn write_csv(&self, w: &mut impl io::Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}
