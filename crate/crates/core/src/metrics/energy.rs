//! Energy accounting: charger consumption, harvested energy and the
//! receiver's communication cost.

use serde::{Deserialize, Serialize};

use crate::engine::{Record, SimTrace};
use crate::model::NodeId;
use crate::time::{SimDuration, SimTime};

/// Power draw of chargers and the datasheet constants of the receiver's
/// radio and microcontroller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    /// Charger draw while switched off (W).
    pub etx_idle_w: f64,
    /// Charger draw while transmitting power (W).
    pub etx_charge_w: f64,
    /// Supply voltage (V).
    pub u_s: f64,
    /// Radio transmit current (A).
    pub i_tx: f64,
    /// Radio receive current (A).
    pub i_rx: f64,
    /// Radio sleep current (A).
    pub i_sleep_radio: f64,
    /// MCU sleep current (A).
    pub i_sleep_mcu: f64,
    /// MCU active current (A).
    pub i_active_mcu: f64,
    /// Radio data rate (bit/s).
    pub r_d: f64,
    /// Packet size (bit).
    pub s_p: f64,
}

impl Default for EnergyParams {
    /// Powercast-class charger switched at the mains (no idle draw) and the
    /// XBee / ATmega328 receiver figures.
    fn default() -> Self {
        EnergyParams {
            etx_idle_w: 0.0,
            etx_charge_w: 4.13,
            u_s: 3.3,
            i_tx: 0.035,
            i_rx: 0.050,
            i_sleep_radio: 10e-6,
            i_sleep_mcu: 9e-6,
            i_active_mcu: 1.7e-3,
            r_d: 9600.0,
            s_p: 960.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<(), (&'static str, &'static str)> {
        let fields = [
            ("etx_idle_w", self.etx_idle_w),
            ("etx_charge_w", self.etx_charge_w),
            ("u_s", self.u_s),
            ("i_tx", self.i_tx),
            ("i_rx", self.i_rx),
            ("i_sleep_radio", self.i_sleep_radio),
            ("i_sleep_mcu", self.i_sleep_mcu),
            ("i_active_mcu", self.i_active_mcu),
            ("s_p", self.s_p),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err((name, "must be finite and non-negative"));
            }
        }
        if !(self.r_d.is_finite() && self.r_d > 0.0) {
            return Err(("r_d", "data rate must be > 0"));
        }
        Ok(())
    }

    /// Air time of one packet in seconds.
    pub fn packet_time_s(&self) -> f64 {
        self.s_p / self.r_d
    }
}

/// Receiver communication energy split into radio and microcontroller parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommEnergy {
    pub radio_j: f64,
    pub mcu_j: f64,
}

impl CommEnergy {
    pub fn total(&self) -> f64 {
        self.radio_j + self.mcu_j
    }
}

/// Datasheet-based energy of a receiver that sent `n_t` and received `n_r`
/// packets over an experiment of `t_e` seconds, including both sleep floors.
pub fn erx_comm_energy(n_t: u64, n_r: u64, t_e: f64, ep: &EnergyParams) -> CommEnergy {
    let pkt = ep.packet_time_s();
    let (n_t, n_r) = (n_t as f64, n_r as f64);
    let radio_j = n_t * pkt * ep.u_s * ep.i_tx + n_r * pkt * ep.u_s * ep.i_rx + t_e * ep.u_s * ep.i_sleep_radio;
    let mcu_j = (n_t * pkt + n_r * pkt) * ep.u_s * ep.i_active_mcu + t_e * ep.u_s * ep.i_sleep_mcu;
    CommEnergy { radio_j, mcu_j }
}

/// Integrates sampled harvested power over the sampling grid (rectangle
/// rule: each sample holds for one period).
pub fn harvested_energy(trace: &SimTrace) -> f64 {
    let dt = trace.sample_period.as_secs_f64();
    trace
        .entries
        .iter()
        .filter_map(|e| match e.record {
            Record::Sample { p_harvested, .. } => Some(p_harvested * dt),
            _ => None,
        })
        .sum()
}

/// Total time each charger spent transmitting power, in trace order of
/// `trace.etxs`.
pub fn on_durations(trace: &SimTrace) -> Vec<(NodeId, SimDuration)> {
    trace
        .etxs
        .iter()
        .map(|&id| {
            let mut since: Option<SimTime> = None;
            let mut total = 0u64;
            for e in trace.entries.iter().filter(|e| e.node == Some(id)) {
                match e.record {
                    Record::PowerOn if since.is_none() => since = Some(e.time),
                    Record::PowerOff => {
                        if let Some(t0) = since.take() {
                            total += (e.time - t0).0;
                        }
                    }
                    _ => {}
                }
            }
            if let Some(t0) = since {
                total += trace.end.saturating_sub(t0).0;
            }
            (id, SimDuration(total))
        })
        .collect()
}

/// Energy drawn by all chargers over the whole run.
pub fn etx_consumed_energy(trace: &SimTrace, ep: &EnergyParams) -> f64 {
    let t_e = trace.end.as_secs_f64();
    on_durations(trace)
        .into_iter()
        .map(|(_, on)| {
            let on = on.as_secs_f64();
            on * ep.etx_charge_w + (t_e - on) * ep.etx_idle_w
        })
        .sum()
}

/// Energy drawn by chargers while transmitting power only.
pub fn etx_charging_energy(trace: &SimTrace, ep: &EnergyParams) -> f64 {
    on_durations(trace).into_iter().map(|(_, on)| on.as_secs_f64() * ep.etx_charge_w).sum()
}

/// Harvested over consumed-while-charging. `None` when chargers never
/// transmitted. `include_idle` adds idle draw to the denominator.
pub fn charging_efficiency(trace: &SimTrace, ep: &EnergyParams, include_idle: bool) -> Option<f64> {
    let charging = etx_charging_energy(trace, ep);
    if charging <= 0.0 {
        return None;
    }
    let denom = if include_idle { etx_consumed_energy(trace, ep) } else { charging };
    Some(harvested_energy(trace) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn comm_energy_zero() {
        assert_eq!(erx_comm_energy(0, 0, 0.0, &EnergyParams::default()).total(), 0.0);
    }

    #[test]
    fn comm_energy_single_packet() {
        let e = erx_comm_energy(1, 0, 0.0, &EnergyParams::default());
        // 0.1 s air time at 3.3 V
        assert!((e.radio_j - 0.011550).abs() < 1e-9);
        assert!((e.mcu_j - 0.000561).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn comm_energy_linear_and_monotone(nt in 0u64..1000, nr in 0u64..1000, te in 0.0f64..1e4) {
            let ep = EnergyParams::default();
            let base = erx_comm_energy(nt, nr, te, &ep).total();
            prop_assert!(erx_comm_energy(nt + 1, nr, te, &ep).total() > base);
            prop_assert!(erx_comm_energy(nt, nr + 1, te, &ep).total() > base);
            prop_assert!(erx_comm_energy(nt, nr, te + 1.0, &ep).total() > base);
            let double = erx_comm_energy(2 * nt, 2 * nr, 2.0 * te, &ep).total();
            prop_assert!((double - 2.0 * base).abs() <= 1e-9 * base.max(1.0));
        }
    }
}
