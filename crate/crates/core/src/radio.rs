//! Synthetic radio physics: charging-band received power, rectification to
//! a load voltage, and control-band signal strength.
//!
//! Both bands use a deterministic log-distance model referenced to 1 m.
//! Chargers have a two-level antenna pattern: receivers in the half-plane
//! the antenna faces get the front gain, everything behind gets the back
//! gain. The control band is omnidirectional.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Pose;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadioError {
    #[error("transmitter and receiver are coincident at ({x}, {y})")]
    Coincident { x: f64, y: f64 },
    #[error("invalid radio parameter {field}: {reason}")]
    Invalid { field: &'static str, reason: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioModelParams {
    /// Charger transmit power (W).
    pub tx_power_w: f64,
    /// Charging-band path loss exponent.
    pub path_loss_exponent: f64,
    /// Charging-band loss at 1 m (dB).
    pub reference_loss_db: f64,
    pub etx_front_gain_db: f64,
    pub etx_back_gain_db: f64,
    pub erx_gain_db: f64,
    /// RF-to-DC conversion efficiency above the rectification threshold.
    pub rect_efficiency: f64,
    /// Minimum input power the rectifier needs (W).
    pub rect_threshold_w: f64,
    pub load_resistance_ohm: f64,
    /// Control-band transmit power (dBm).
    pub comm_tx_power_dbm: f64,
    /// Control-band loss at 1 m (dB).
    pub comm_reference_loss_db: f64,
    pub comm_path_loss_exponent: f64,
}

impl RadioModelParams {
    pub fn validate(&self) -> Result<(), RadioError> {
        let bad = |field, reason| Err(RadioError::Invalid { field, reason });
        if !(self.tx_power_w.is_finite() && self.tx_power_w >= 0.0) {
            return bad("tx_power_w", "must be finite and non-negative");
        }
        if !(self.path_loss_exponent >= 1.0) {
            return bad("path_loss_exponent", "must be >= 1");
        }
        if !(self.comm_path_loss_exponent >= 1.0) {
            return bad("comm_path_loss_exponent", "must be >= 1");
        }
        for (field, v) in [
            ("reference_loss_db", self.reference_loss_db),
            ("etx_front_gain_db", self.etx_front_gain_db),
            ("etx_back_gain_db", self.etx_back_gain_db),
            ("erx_gain_db", self.erx_gain_db),
            ("comm_tx_power_dbm", self.comm_tx_power_dbm),
            ("comm_reference_loss_db", self.comm_reference_loss_db),
        ] {
            if !v.is_finite() {
                return bad(field, "must be finite");
            }
        }
        if !(self.rect_efficiency > 0.0 && self.rect_efficiency <= 1.0) {
            return bad("rect_efficiency", "must be in (0, 1]");
        }
        if !(self.rect_threshold_w > 0.0 && self.rect_threshold_w.is_finite()) {
            return bad("rect_threshold_w", "must be > 0");
        }
        if !(self.load_resistance_ohm > 0.0 && self.load_resistance_ohm.is_finite()) {
            return bad("load_resistance_ohm", "must be > 0");
        }
        Ok(())
    }
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}

fn checked_distance(a: &Pose, b: &Pose) -> Result<f64, RadioError> {
    let d = a.distance(b);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(RadioError::Coincident { x: a.x, y: a.y })
    }
}

/// Whether `target` lies in the half-plane the antenna at `antenna` faces.
pub fn in_front(antenna: &Pose, target: &Pose) -> bool {
    let heading = antenna.azimuth.to_radians();
    let (dx, dy) = (target.x - antenna.x, target.y - antenna.y);
    dx * heading.cos() + dy * heading.sin() >= 0.0
}

/// Charging-band power at `erx` from a charger at `etx` radiating `tx_power_w`.
///
/// The result never exceeds the radiated power.
pub fn received_power_with(
    tx_power_w: f64,
    etx: &Pose,
    erx: &Pose,
    rm: &RadioModelParams,
) -> Result<f64, RadioError> {
    let d = checked_distance(etx, erx)?;
    let etx_gain = if in_front(etx, erx) { rm.etx_front_gain_db } else { rm.etx_back_gain_db };
    let gain_db = etx_gain + rm.erx_gain_db - rm.reference_loss_db - 10.0 * rm.path_loss_exponent * d.log10();
    let p = tx_power_w * 10f64.powf(gain_db / 10.0);
    Ok(p.min(tx_power_w).max(0.0))
}

pub fn received_power(etx: &Pose, erx: &Pose, rm: &RadioModelParams) -> Result<f64, RadioError> {
    received_power_with(rm.tx_power_w, etx, erx, rm)
}

/// Total charging-band power from every active charger. Contributions add
/// linearly; interference is not modelled.
pub fn aggregate_received_power(
    active_etxs: &[Pose],
    erx: &Pose,
    rm: &RadioModelParams,
) -> Result<f64, RadioError> {
    active_etxs.iter().map(|etx| received_power(etx, erx, rm)).sum()
}

/// Rectifier output `(harvested W, load V)` for input power `p_in`.
pub fn rectify(p_in: f64, rm: &RadioModelParams) -> (f64, f64) {
    let harvested = if p_in >= rm.rect_threshold_w { rm.rect_efficiency * p_in } else { 0.0 };
    (harvested, (harvested * rm.load_resistance_ohm).sqrt())
}

/// Control-band received signal strength in dBm.
pub fn rssi_dbm(src: &Pose, dst: &Pose, rm: &RadioModelParams) -> Result<f64, RadioError> {
    let d = checked_distance(src, dst)?;
    Ok(rm.comm_tx_power_dbm - rm.comm_reference_loss_db - 10.0 * rm.comm_path_loss_exponent * d.log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat() -> RadioModelParams {
        RadioModelParams {
            tx_power_w: 3.0,
            path_loss_exponent: 2.0,
            reference_loss_db: 30.0,
            etx_front_gain_db: 0.0,
            etx_back_gain_db: -20.0,
            erx_gain_db: 0.0,
            rect_efficiency: 0.5,
            rect_threshold_w: 1e-4,
            load_resistance_ohm: 500.0,
            comm_tx_power_dbm: 0.0,
            comm_reference_loss_db: 40.0,
            comm_path_loss_exponent: 2.0,
        }
    }

    #[test]
    fn link_budget_at_one_meter() {
        let p = received_power(&Pose::new(0.0, 0.0, 0.0), &Pose::new(1.0, 0.0, 0.0), &flat()).unwrap();
        assert!((p - 3e-3).abs() < 1e-15);
    }

    #[test]
    fn inverse_square() {
        let rm = flat();
        let etx = Pose::new(0.0, 0.0, 30.0);
        let near = received_power(&etx, &Pose::new(1.2, 0.7, 0.0), &rm).unwrap();
        let far = received_power(&etx, &Pose::new(2.4, 1.4, 0.0), &rm).unwrap();
        assert!((near / far - 4.0).abs() < 1e-9);
    }

    #[test]
    fn back_hemisphere_is_attenuated() {
        let rm = flat();
        let etx = Pose::new(0.0, 0.0, 0.0);
        let front = received_power(&etx, &Pose::new(1.5, 0.0, 0.0), &rm).unwrap();
        let back = received_power(&etx, &Pose::new(-1.5, 0.0, 0.0), &rm).unwrap();
        assert!((front / back - 100.0).abs() < 1e-9);
    }

    #[test]
    fn coincident_rejected() {
        let p = Pose::new(1.0, 1.0, 0.0);
        assert!(matches!(received_power(&p, &p, &flat()), Err(RadioError::Coincident { .. })));
        assert!(rssi_dbm(&p, &p, &flat()).is_err());
    }

    #[test]
    fn aggregate_cases() {
        let rm = flat();
        let erx = Pose::new(1.0, 0.0, 0.0);
        let etx = Pose::new(0.0, 0.0, 0.0);
        assert_eq!(aggregate_received_power(&[], &erx, &rm).unwrap(), 0.0);
        let single = received_power(&etx, &erx, &rm).unwrap();
        assert_eq!(aggregate_received_power(&[etx], &erx, &rm).unwrap(), single);
        assert_eq!(aggregate_received_power(&[etx, etx], &erx, &rm).unwrap(), 2.0 * single);
    }

    #[test]
    fn rectifier_cases() {
        let mut rm = flat();
        assert_eq!(rectify(rm.rect_threshold_w * 0.99, &rm), (0.0, 0.0));
        let (h, _) = rectify(rm.rect_threshold_w, &rm);
        assert_eq!(h, rm.rect_efficiency * rm.rect_threshold_w);
        rm.rect_threshold_w = 1e-5;
        let (h, v) = rectify(1e-3, &rm);
        assert!((h - 0.5e-3).abs() < 1e-15);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rssi_link_budget_and_decade_slope() {
        let rm = flat();
        let src = Pose::new(0.0, 0.0, 0.0);
        let r1 = rssi_dbm(&src, &Pose::new(1.0, 0.0, 0.0), &rm).unwrap();
        assert!((r1 + 40.0).abs() < 1e-12);
        let r10 = rssi_dbm(&src, &Pose::new(10.0, 0.0, 0.0), &rm).unwrap();
        assert!((r1 - r10 - 20.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_swaps_mirror_receivers() {
        let rm = flat();
        let etx = Pose::new(0.0, 0.0, 0.0);
        let a = Pose::new(1.0, 0.5, 0.0);
        let b = Pose::new(-1.0, -0.5, 0.0);
        let pa = received_power(&etx, &a, &rm).unwrap();
        let pb = received_power(&etx, &b, &rm).unwrap();
        let turned = etx.rotated(180.0);
        assert_eq!(received_power(&turned, &a, &rm).unwrap(), pb);
        assert_eq!(received_power(&turned, &b, &rm).unwrap(), pa);
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_w(30.0) - 1.0).abs() < 1e-12);
        assert!((w_to_dbm(1e-3)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn power_non_increasing_with_distance(az in 0.0f64..360.0, ang in 0.0f64..360.0, d in 0.05f64..10.0, k in 1.0f64..5.0) {
            let rm = flat();
            let etx = Pose::new(0.0, 0.0, az);
            let (s, c) = ang.to_radians().sin_cos();
            let near = received_power(&etx, &Pose::new(d * c, d * s, 0.0), &rm).unwrap();
            let far = received_power(&etx, &Pose::new(k * d * c, k * d * s, 0.0), &rm).unwrap();
            prop_assert!(far <= near);
        }

        #[test]
        fn rssi_strictly_decreasing(d in 0.05f64..10.0, k in 1.001f64..5.0) {
            let rm = flat();
            let src = Pose::new(0.0, 0.0, 0.0);
            prop_assert!(rssi_dbm(&src, &Pose::new(k * d, 0.0, 0.0), &rm).unwrap() < rssi_dbm(&src, &Pose::new(d, 0.0, 0.0), &rm).unwrap());
        }

        #[test]
        fn rectifier_bounds(p in 0.0f64..1.0, eff in 0.01f64..=1.0, r in 1.0f64..5000.0) {
            let rm = RadioModelParams { rect_efficiency: eff, load_resistance_ohm: r, ..flat() };
            let (h, v) = rectify(p, &rm);
            prop_assert!(h <= eff * p);
            prop_assert!((v * v / r - h).abs() <= 1e-12 * h.max(1e-300));
        }

        #[test]
        fn aggregate_is_sum_of_singletons(pts in proptest::collection::vec((0.1f64..3.0, 0.1f64..3.0, 0.0f64..360.0), 0..6)) {
            let rm = flat();
            let erx = Pose::new(-0.5, -0.5, 0.0);
            let etxs: Vec<Pose> = pts.iter().map(|&(x, y, a)| Pose::new(x, y, a)).collect();
            let agg = aggregate_received_power(&etxs, &erx, &rm).unwrap();
            let mut acc = 0.0;
            for e in &etxs {
                acc += received_power(e, &erx, &rm).unwrap();
            }
            prop_assert_eq!(agg, acc);
        }

        #[test]
        fn voltage_above_threshold_implies_rectifiable(x in -3.0f64..3.0, y in -3.0f64..3.0, az in 0.0f64..360.0) {
            prop_assume!(x.hypot(y) > 1e-3);
            let rm = flat();
            let p = received_power(&Pose::new(0.0, 0.0, az), &Pose::new(x, y, 0.0), &rm).unwrap();
            let (_, v) = rectify(p, &rm);
            if v > 0.5 {
                prop_assert!(p >= rm.rect_threshold_w);
            }
        }
    }
}
