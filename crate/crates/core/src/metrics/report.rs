//! Per-run metric summary and its CSV row.

use std::collections::BTreeMap;

use crate::engine::{reference_vector, Record, Scenario, SimTrace};
use crate::model::NodeId;

use super::accuracy::trace_accuracy;
use super::energy::{charging_efficiency, erx_comm_energy, etx_consumed_energy, harvested_energy};
use super::ttc::{time_to_charge_samples, TtcOrigin, TtcSamples};
use super::MetricsError;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario: String,
    pub protocol: String,
    pub seed: u64,
    pub comm_threshold_dbm: f64,
    pub harvested_j: f64,
    pub etx_consumed_j: f64,
    /// `None` when no charger ever transmitted.
    pub efficiency: Option<f64>,
    pub erx_comm_j: f64,
    pub accuracy: f64,
    pub ttc: TtcSamples,
    /// `(sent, received)` per node.
    pub message_counts: BTreeMap<NodeId, (u64, u64)>,
}

pub const REPORT_HEADER: &str = "scenario,protocol,seed,comm_threshold_dbm,harvested_j,etx_consumed_j,efficiency,\
erx_comm_j,accuracy,ttc_mean_s,ttc_count,ttc_censored,n_tx,n_rx";

impl MetricsReport {
    pub fn erx_counts(&self) -> (u64, u64) {
        self.message_counts
            .iter()
            .find(|(n, _)| n.kind == crate::model::NodeKind::Erx)
            .map(|(_, c)| *c)
            .unwrap_or((0, 0))
    }

    pub fn csv_row(&self) -> String {
        let eff = self.efficiency.map_or_else(|| "NA".to_string(), |e| format!("{e:.9}"));
        let ttc = self.ttc.mean().map_or_else(|| "NA".to_string(), |m| format!("{m:.6}"));
        let (n_tx, n_rx) = self.erx_counts();
        format!(
            "{},{},{},{},{:.9},{:.6},{},{:.9},{:.6},{},{},{},{},{}",
            self.scenario,
            self.protocol,
            self.seed,
            self.comm_threshold_dbm,
            self.harvested_j,
            self.etx_consumed_j,
            eff,
            self.erx_comm_j,
            self.accuracy,
            ttc,
            self.ttc.samples.len(),
            self.ttc.censored,
            n_tx,
            n_rx
        )
    }
}

pub fn message_counts(trace: &SimTrace) -> BTreeMap<NodeId, (u64, u64)> {
    let mut m: BTreeMap<NodeId, (u64, u64)> = BTreeMap::new();
    m.insert(trace.erx, (0, 0));
    for &id in &trace.etxs {
        m.insert(id, (0, 0));
    }
    for e in &trace.entries {
        match (&e.record, e.node) {
            (Record::Sent { msg }, _) => m.entry(msg.src).or_default().0 += 1,
            (Record::Delivered { .. }, Some(n)) => m.entry(n).or_default().1 += 1,
            _ => {}
        }
    }
    m
}

/// All metrics of one run. The scenario must be the one that produced the
/// trace; its seed fixes the reference grid.
pub fn evaluate(sc: &Scenario, trace: &SimTrace) -> Result<MetricsReport, MetricsError> {
    let reference = reference_vector(sc).map_err(|e| MetricsError::Reference(e.to_string()))?;
    let counts = message_counts(trace);
    let (n_t, n_r) = counts.get(&trace.erx).copied().unwrap_or((0, 0));
    Ok(MetricsReport {
        scenario: sc.meta.name.clone(),
        protocol: trace.protocol.to_string(),
        seed: sc.meta.seed,
        comm_threshold_dbm: sc.protocol_params.comm_threshold_dbm,
        harvested_j: harvested_energy(trace),
        etx_consumed_j: etx_consumed_energy(trace, &sc.energy),
        efficiency: charging_efficiency(trace, &sc.energy, false),
        erx_comm_j: erx_comm_energy(n_t, n_r, trace.end.as_secs_f64(), &sc.energy).total(),
        accuracy: trace_accuracy(trace, &reference)?,
        ttc: time_to_charge_samples(trace, TtcOrigin::Appearance),
        message_counts: counts,
    })
}

pub fn reports_to_csv(reports: &[MetricsReport]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}
