//! Scenario description and its TOML file format.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::EnergyParams;
use crate::model::{NodeId, Pose, ProtocolParams};
use crate::protocols::Protocol;
use crate::radio::RadioModelParams;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioMeta {
    pub name: String,
    pub protocol: Protocol,
    pub rounds: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtxConfig {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub azimuth: f64,
    /// Overrides `radio.tx_power_w`; zero models a charger whose power stage
    /// is disconnected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_w: Option<f64>,
    /// Overrides `protocol_params.comm_threshold_dbm` for this charger.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comm_threshold_dbm: Option<f64>,
}

impl EtxConfig {
    pub fn node(&self) -> NodeId {
        NodeId::etx(self.id)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.azimuth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub azimuth: f64,
    pub dwell_min_s: f64,
    pub dwell_max_s: f64,
    pub pause_s: f64,
}

impl Waypoint {
    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.azimuth)
    }
}

/// A complete experiment: chargers, the receiver's route, protocol and
/// physical parameters, and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "scenario")]
    pub meta: ScenarioMeta,
    #[serde(rename = "etx")]
    pub etxs: Vec<EtxConfig>,
    #[serde(rename = "waypoint")]
    pub erx_waypoints: Vec<Waypoint>,
    pub protocol_params: ProtocolParams,
    pub radio: RadioModelParams,
    pub energy: EnergyParams,
}

/// The single receiver every scenario carries.
pub const ERX: NodeId = NodeId::erx(0);

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Scenario::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario is always serializable")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.etxs.is_empty() {
            return Err(invalid("etx", "at least one charger is required"));
        }
        if self.erx_waypoints.is_empty() {
            return Err(invalid("waypoint", "at least one waypoint is required"));
        }
        if self.meta.rounds == 0 {
            return Err(invalid("scenario.rounds", "must be >= 1"));
        }
        let mut ids = BTreeSet::new();
        for (i, e) in self.etxs.iter().enumerate() {
            if !ids.insert(e.id) {
                return Err(invalid(format!("etx[{i}].id"), format!("duplicate charger id {}", e.id)));
            }
            e.pose().validate(&format!("etx[{i}]")).map_err(|err| invalid(format!("etx[{i}]"), err.to_string()))?;
            if let Some(p) = e.tx_power_w {
                if !(p.is_finite() && p >= 0.0) {
                    return Err(invalid(format!("etx[{i}].tx_power_w"), "must be finite and non-negative"));
                }
            }
            if let Some(th) = e.comm_threshold_dbm {
                if !th.is_finite() {
                    return Err(invalid(format!("etx[{i}].comm_threshold_dbm"), "must be finite"));
                }
            }
        }
        for (i, w) in self.erx_waypoints.iter().enumerate() {
            w.pose().validate(&format!("waypoint[{i}]")).map_err(|err| invalid(format!("waypoint[{i}]"), err.to_string()))?;
            if !(w.dwell_min_s.is_finite() && w.dwell_min_s >= 0.0) {
                return Err(invalid(format!("waypoint[{i}].dwell_min_s"), "must be a non-negative number of seconds"));
            }
            if !(w.dwell_max_s.is_finite() && w.dwell_max_s >= w.dwell_min_s) {
                return Err(invalid(
                    format!("waypoint[{i}].dwell_min_s"),
                    format!("dwell_min_s ({}) must not exceed dwell_max_s ({})", w.dwell_min_s, w.dwell_max_s),
                ));
            }
            if !(w.pause_s.is_finite() && w.pause_s >= 0.0) {
                return Err(invalid(format!("waypoint[{i}].pause_s"), "must be a non-negative number of seconds"));
            }
            for e in &self.etxs {
                if e.pose().distance(&w.pose()) <= 0.0 {
                    return Err(invalid(format!("waypoint[{i}]"), format!("coincides with charger {}", e.id)));
                }
            }
        }
        self.protocol_params
            .validate()
            .map_err(|e| invalid("protocol_params", e.to_string()))?;
        self.radio.validate().map_err(|e| invalid("radio", e.to_string()))?;
        self.energy
            .validate()
            .map_err(|(f, r)| invalid(format!("energy.{f}"), r))?;
        Ok(())
    }

    pub fn etx_tx_power(&self, e: &EtxConfig) -> f64 {
        e.tx_power_w.unwrap_or(self.radio.tx_power_w)
    }

    pub fn etx_threshold(&self, e: &EtxConfig) -> f64 {
        e.comm_threshold_dbm.unwrap_or(self.protocol_params.comm_threshold_dbm)
    }

    pub fn with_protocol(mut self, protocol: Protocol) -> Scenario {
        self.meta.protocol = protocol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Scenario {
        self.meta.seed = seed;
        self
    }

    /// Applies one communication threshold to every charger, clearing
    /// per-charger overrides.
    pub fn with_comm_threshold(mut self, dbm: f64) -> Scenario {
        self.protocol_params.comm_threshold_dbm = dbm;
        for e in &mut self.etxs {
            e.comm_threshold_dbm = None;
        }
        self
    }

    /// Turns the given chargers around by 180 degrees.
    pub fn with_rotated(mut self, ids: &[u32]) -> Scenario {
        for e in &mut self.etxs {
            if ids.contains(&e.id) {
                e.azimuth = e.pose().rotated(180.0).azimuth;
            }
        }
        self
    }

    /// The reference deployment: four chargers on the corners of a
    /// 1.5 m x 3.5 m rectangle, antennas at 45 degrees to the border and
    /// facing inwards, and a ten-position receiver route on a 0.5 m x 1 m
    /// grid along the long sides, visited five times. Radio constants are
    /// calibrated so that only a near charger facing the receiver lifts the
    /// load above the power threshold.
    pub fn default_los() -> Scenario {
        let etx = |id, x, y, azimuth| EtxConfig { id, x, y, azimuth, tx_power_w: None, comm_threshold_dbm: None };
        let wp = |x, y| Waypoint { x, y, azimuth: 0.0, dwell_min_s: 40.0, dwell_max_s: 44.0, pause_s: 15.0 };
        Scenario {
            meta: ScenarioMeta { name: "los".into(), protocol: Protocol::Probing, rounds: 5, seed: 1 },
            etxs: vec![
                etx(1, 0.0, 0.0, 45.0),
                etx(2, 1.5, 0.0, 135.0),
                etx(3, 1.5, 3.5, 225.0),
                etx(4, 0.0, 3.5, 315.0),
            ],
            erx_waypoints: vec![
                wp(0.25, 0.25),
                wp(0.25, 0.75),
                wp(0.25, 1.25),
                wp(1.25, 1.25),
                wp(1.25, 0.75),
                wp(1.25, 0.25),
                wp(1.25, 2.25),
                wp(1.25, 2.75),
                wp(0.25, 2.75),
                wp(0.25, 3.25),
            ],
            protocol_params: ProtocolParams::default(),
            radio: RadioModelParams {
                tx_power_w: 3.0,
                path_loss_exponent: 2.7,
                reference_loss_db: 45.5,
                etx_front_gain_db: 5.0,
                etx_back_gain_db: -15.0,
                erx_gain_db: 1.0,
                rect_efficiency: 0.5,
                rect_threshold_w: 1e-4,
                load_resistance_ohm: 1000.0,
                comm_tx_power_dbm: 0.0,
                comm_reference_loss_db: 47.0,
                comm_path_loss_exponent: 5.0,
            },
            energy: EnergyParams::default(),
        }
    }

    /// The reference deployment with chargers 1 and 3 facing away.
    pub fn default_non_los() -> Scenario {
        let mut sc = Scenario::default_los().with_rotated(&[1, 3]);
        sc.meta.name = "nlos".into();
        sc
    }
}
