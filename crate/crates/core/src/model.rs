//! Shared domain types and the per-slot performance descriptors of a
//! charger/receiver pair.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::SimDuration;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("received power {delta} W exceeds transmit power {mu} W")]
    EnergyConservation { delta: f64, mu: f64 },
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ModelError {
    ModelError::Invalid { field: field.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Etx,
    Erx,
}

/// Identifies a charger (ETx) or receiver (ERx) within one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub id: u32,
    pub kind: NodeKind,
}

impl NodeId {
    pub const fn etx(id: u32) -> NodeId {
        NodeId { id, kind: NodeKind::Etx }
    }

    pub const fn erx(id: u32) -> NodeId {
        NodeId { id, kind: NodeKind::Erx }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Etx => write!(f, "etx{}", self.id),
            NodeKind::Erx => write!(f, "erx{}", self.id),
        }
    }
}

/// Planar position in meters plus antenna heading in degrees.
///
/// Azimuth is measured counter-clockwise from the +x axis and is kept in
/// `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub azimuth: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, azimuth: f64) -> Pose {
        Pose { x, y, azimuth: normalize_azimuth(azimuth) }
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn rotated(&self, degrees: f64) -> Pose {
        Pose::new(self.x, self.y, self.azimuth + degrees)
    }

    pub fn validate(&self, field: &str) -> Result<(), ModelError> {
        if !(self.x.is_finite() && self.y.is_finite() && self.azimuth.is_finite()) {
            return Err(invalid(field, "coordinates must be finite"));
        }
        Ok(())
    }
}

pub fn normalize_azimuth(deg: f64) -> f64 {
    let a = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Protocol timers and thresholds. Key names follow the parameter table used
/// by the reference hardware deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    /// ETx, Beaconing: REQ_CRG feedback timeout while ON.
    pub t_crgreq_timeout: f64,
    /// ETx: RSSI below which ERx packets are ignored (dBm).
    pub comm_threshold_dbm: f64,
    /// ERx: REQ_CRG broadcast period.
    pub t_ping: f64,
    /// ETx, Probing: wait for REP_PWR after REQ_PWR.
    pub t_pwr_probe_rsp: f64,
    /// ERx, Probing: lifetime of a Q_TX entry.
    pub t_rmv_last: f64,
    /// ETx, Probing: wait for the first unsolicited REP_PWR after turning on.
    pub t_turn_off: f64,
    /// ETx, Probing: REP_PWR feedback timeout while ON.
    pub t_etx_pwr_probe: f64,
    /// ERx, Probing: REP_PWR period while CHARGED.
    pub t_erx_pwr_probe: f64,
    /// ETx, Probing: upper bound of the uniform back-off before REQ_PWR.
    pub t_rand_wait_max: f64,
    /// ERx, Probing: how long to wait for power in WAIT.
    pub t_wait_for_pwr: f64,
    /// ERx: load voltage above which charging is considered effective (V).
    pub v_power_threshold: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            t_crgreq_timeout: 8.0,
            comm_threshold_dbm: -70.0,
            t_ping: 4.0,
            t_pwr_probe_rsp: 4.0,
            t_rmv_last: 30.0,
            t_turn_off: 2.0,
            t_etx_pwr_probe: 8.0,
            t_erx_pwr_probe: 4.0,
            t_rand_wait_max: 0.5,
            t_wait_for_pwr: 4.0,
            v_power_threshold: 0.5,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let durations = [
            ("t_crgreq_timeout", self.t_crgreq_timeout),
            ("t_ping", self.t_ping),
            ("t_pwr_probe_rsp", self.t_pwr_probe_rsp),
            ("t_rmv_last", self.t_rmv_last),
            ("t_turn_off", self.t_turn_off),
            ("t_etx_pwr_probe", self.t_etx_pwr_probe),
            ("t_erx_pwr_probe", self.t_erx_pwr_probe),
            ("t_rand_wait_max", self.t_rand_wait_max),
            ("t_wait_for_pwr", self.t_wait_for_pwr),
        ];
        for (name, v) in durations {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("duration must be > 0, got {v}")));
            }
        }
        if !self.comm_threshold_dbm.is_finite() {
            return Err(invalid("comm_threshold_dbm", "must be finite"));
        }
        if !(self.v_power_threshold.is_finite() && self.v_power_threshold >= 0.0) {
            return Err(invalid("v_power_threshold", "must be a non-negative voltage"));
        }
        Ok(())
    }

    pub fn dur(secs: f64) -> SimDuration {
        SimDuration::from_secs_f64(secs)
    }
}

/// Per-pair performance descriptors for one time slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfVector {
    /// Received power in watts.
    pub delta: f64,
    /// Charging accuracy, 0 or 1.
    pub theta: f64,
    /// Charging efficiency.
    pub xi: f64,
    /// Charging error, `1 - theta`.
    pub eta: f64,
    /// Energy wasting rate, `1 / xi`.
    pub psi: f64,
}

impl PerfVector {
    /// Evaluates all descriptors for switch decision `on`, received power
    /// `delta`, rectification threshold `e_r` and transmit power `mu`.
    pub fn evaluate(on: bool, delta: f64, e_r: f64, mu: f64) -> Result<PerfVector, ModelError> {
        let theta = f64::from(accuracy(on, delta, e_r));
        let xi = efficiency(on, delta, mu)?;
        let psi = if xi > 0.0 { 1.0 / xi } else { f64::INFINITY };
        Ok(PerfVector { delta, theta, xi, eta: 1.0 - theta, psi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintsAndWeights {
    pub delta_t: f64,
    pub eta_t: f64,
    pub psi_t: f64,
    pub w_delta: f64,
    pub w_eta: f64,
    pub w_psi: f64,
    pub o_q: f64,
}

impl ConstraintsAndWeights {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, w) in [("w_delta", self.w_delta), ("w_eta", self.w_eta), ("w_psi", self.w_psi)] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid(name, "weights must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomicParams {
    pub eta_cpt: f64,
    pub eta_wpt: f64,
    pub gamma_wh_per_day: f64,
    pub cost_per_kwh: f64,
}

impl EconomicParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.eta_wpt > 0.0 && self.eta_wpt <= self.eta_cpt && self.eta_cpt <= 1.0) {
            return Err(invalid("eta_wpt/eta_cpt", "require 0 < eta_wpt <= eta_cpt <= 1"));
        }
        if !(self.gamma_wh_per_day > 0.0) {
            return Err(invalid("gamma_wh_per_day", "must be > 0"));
        }
        if !(self.cost_per_kwh > 0.0) {
            return Err(invalid("cost_per_kwh", "must be > 0"));
        }
        Ok(())
    }
}

/// True when the switch decision matches whether the receiver could rectify.
/// The boundary `delta == e_r` counts as chargeable.
pub fn accuracy(on: bool, delta: f64, e_r: f64) -> bool {
    on == (delta >= e_r)
}

/// Received-to-transmitted power ratio for an active charger; an idle charger
/// wastes nothing and scores 1.
pub fn efficiency(on: bool, delta: f64, mu: f64) -> Result<f64, ModelError> {
    if delta > mu {
        return Err(ModelError::EnergyConservation { delta, mu });
    }
    if !(mu > 0.0) || delta < 0.0 {
        return Err(invalid("efficiency", "require mu > 0 and delta >= 0"));
    }
    Ok(if on { delta / mu } else { 1.0 })
}

/// Weighted sums `(o, a, s)` of the descriptor vector, its alternative form
/// and the constraint vector.
pub fn weighted_sums(perf: &PerfVector, cw: &ConstraintsAndWeights) -> (f64, f64, f64) {
    let w = [cw.w_delta, cw.w_eta, cw.w_psi];
    let dot = |v: [f64; 3]| -> f64 {
        // zero weights must not turn an infinite wasting rate into NaN
        w.iter().zip(v).filter(|(wi, _)| **wi != 0.0).map(|(wi, vi)| wi * vi).sum()
    };
    let o = dot([perf.delta, perf.theta, perf.xi]);
    let a = dot([perf.delta, perf.eta, perf.psi]);
    let s = dot([cw.delta_t, cw.eta_t, cw.psi_t]);
    (o, a, s)
}

/// Extra cost of delivering the same energy wirelessly instead of by cable
/// over `days`, using the difference of reciprocal conversion efficiencies.
pub fn extra_energy_cost(econ: &EconomicParams, days: f64) -> f64 {
    let gamma_kwh = econ.gamma_wh_per_day / 1000.0;
    days * econ.cost_per_kwh * gamma_kwh * (1.0 / econ.eta_wpt - 1.0 / econ.eta_cpt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accuracy_boundary_and_branches() {
        let e_r = 1e-3;
        assert!(accuracy(true, e_r, e_r));
        assert!(accuracy(false, 0.0, e_r));
        assert!(!accuracy(true, e_r / 2.0, e_r));
        assert!(!accuracy(false, e_r, e_r));
    }

    #[test]
    fn efficiency_cases() {
        assert_eq!(efficiency(false, 1.234, 3.0).unwrap(), 1.0);
        assert_eq!(efficiency(true, 3.0, 3.0).unwrap(), 1.0);
        assert!((efficiency(true, 0.03, 3.0).unwrap() - 0.01).abs() < 1e-15);
        assert!(matches!(
            efficiency(true, 3.1, 3.0),
            Err(ModelError::EnergyConservation { .. })
        ));
    }

    #[test]
    fn weighted_sum_examples() {
        let perf = PerfVector { delta: 1.0, theta: 1.0, xi: 0.5, eta: 0.0, psi: 2.0 };
        let zero = ConstraintsAndWeights::default();
        assert_eq!(weighted_sums(&perf, &zero), (0.0, 0.0, 0.0));

        let sel = ConstraintsAndWeights { w_delta: 1.0, ..Default::default() };
        let p = PerfVector { delta: 2.5, ..perf };
        assert_eq!(weighted_sums(&p, &sel).0, 2.5);

        let ones = ConstraintsAndWeights {
            delta_t: 1.0,
            eta_t: 1.0,
            psi_t: 1.0,
            w_delta: 1.0,
            w_eta: 1.0,
            w_psi: 1.0,
            o_q: 0.0,
        };
        assert_eq!(weighted_sums(&perf, &ones), (2.5, 3.0, 3.0));
    }

    #[test]
    fn extra_cost_examples() {
        let same = EconomicParams { eta_cpt: 0.5, eta_wpt: 0.5, gamma_wh_per_day: 10.0, cost_per_kwh: 0.2 };
        assert_eq!(extra_energy_cost(&same, 365.0), 0.0);

        let unit = EconomicParams { eta_cpt: 1.0, eta_wpt: 0.5, gamma_wh_per_day: 1000.0, cost_per_kwh: 1.0 };
        assert!((extra_energy_cost(&unit, 1.0) - 1.0).abs() < 1e-12);

        let phone = EconomicParams { eta_cpt: 0.59, eta_wpt: 0.01, gamma_wh_per_day: 12.5, cost_per_kwh: 0.23 };
        let cost = extra_energy_cost(&phone, 365.0);
        assert!((cost - 103.88).abs() / 103.88 <= 0.03, "cost = {cost}");
    }

    #[test]
    fn economic_validation_rejects_inverted_efficiencies() {
        let bad = EconomicParams { eta_cpt: 0.01, eta_wpt: 0.59, gamma_wh_per_day: 1.0, cost_per_kwh: 1.0 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn default_params_match_reference_table() {
        let p = ProtocolParams::default();
        let got = [
            p.t_crgreq_timeout,
            p.comm_threshold_dbm,
            p.t_ping,
            p.t_pwr_probe_rsp,
            p.t_rmv_last,
            p.t_turn_off,
            p.t_etx_pwr_probe,
            p.t_erx_pwr_probe,
            p.t_rand_wait_max,
            p.t_wait_for_pwr,
            p.v_power_threshold,
        ];
        assert_eq!(got, [8.0, -70.0, 4.0, 4.0, 30.0, 2.0, 8.0, 4.0, 0.5, 4.0, 0.5]);
        p.validate().unwrap();
    }

    #[test]
    fn azimuth_normalization() {
        assert_eq!(Pose::new(0.0, 0.0, 405.0).azimuth, 45.0);
        assert_eq!(Pose::new(0.0, 0.0, -90.0).azimuth, 270.0);
        assert_eq!(Pose::new(0.0, 0.0, 45.0).rotated(180.0).azimuth, 225.0);
    }

    proptest! {
        #[test]
        fn exactly_one_switch_decision_is_accurate(delta in 0.0f64..10.0, e_r in 1e-6f64..10.0) {
            prop_assert!(accuracy(true, delta, e_r) ^ accuracy(false, delta, e_r));
        }

        #[test]
        fn descriptor_identities(on: bool, mu in 0.1f64..10.0, frac in 0.0f64..=1.0, e_r in 1e-6f64..1.0) {
            let pv = PerfVector::evaluate(on, frac * mu, e_r, mu).unwrap();
            prop_assert_eq!(pv.eta, 1.0 - pv.theta);
            if pv.xi > 0.0 {
                prop_assert!((pv.psi * pv.xi - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn weighted_sums_are_linear_in_weights(
            w in proptest::array::uniform3(0.0f64..5.0),
            delta in 0.0f64..3.0, on: bool,
        ) {
            let pv = PerfVector::evaluate(on, delta, 0.5, 3.0).unwrap();
            prop_assume!(pv.psi.is_finite());
            let cw = ConstraintsAndWeights { delta_t: 2.0, eta_t: 1.0, psi_t: 4.0, w_delta: w[0], w_eta: w[1], w_psi: w[2], o_q: 0.0 };
            let cw2 = ConstraintsAndWeights { w_delta: 2.0 * w[0], w_eta: 2.0 * w[1], w_psi: 2.0 * w[2], ..cw };
            let (o, a, s) = weighted_sums(&pv, &cw);
            let (o2, a2, s2) = weighted_sums(&pv, &cw2);
            prop_assert!((o2 - 2.0 * o).abs() < 1e-9);
            prop_assert!((a2 - 2.0 * a).abs() < 1e-9);
            prop_assert!((s2 - 2.0 * s).abs() < 1e-9);
        }
    }
}
