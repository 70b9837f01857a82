//! Performance indicators computed from traces and the analytical
//! time-to-charge models.

mod accuracy;
mod energy;
mod report;
mod ttc;

pub use accuracy::{charge_accuracy, on_intervals, on_series, trace_accuracy};
pub use energy::{
    charging_efficiency, erx_comm_energy, etx_charging_energy, etx_consumed_energy, harvested_energy,
    on_durations, CommEnergy, EnergyParams,
};
pub use report::{evaluate, message_counts, reports_to_csv, MetricsReport, REPORT_HEADER};
pub use ttc::{
    beaconing_ttc_cdf, probing_round_lengths, probing_round_prob, probing_step_time, probing_ttc_cdf,
    probing_ttc_domain_end, probing_ttc_mean, time_to_charge_samples, EmpiricalCdf, StaircaseIndex,
    TtcOrigin, TtcSamples,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("reference vector: {0}")]
    Reference(String),
}
