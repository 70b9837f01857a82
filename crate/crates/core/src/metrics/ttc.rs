//! Time to charge: measured samples from traces and the closed-form
//! distributions for Beaconing and Probing.

use crate::engine::{Record, SimTrace};
use crate::model::ProtocolParams;
use crate::protocols::MessageKind;
use crate::time::SimTime;

/// Where a time-to-charge sample starts counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TtcOrigin {
    /// The receiver arriving at its position. Includes the wait for the
    /// next scheduled charge request.
    #[default]
    Appearance,
    /// The receiver's first charge request after arriving.
    FirstRequest,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TtcSamples {
    pub samples: Vec<f64>,
    /// Visits that ended without any harvested power.
    pub censored: usize,
}

impl TtcSamples {
    pub fn mean(&self) -> Option<f64> {
        (!self.samples.is_empty()).then(|| self.samples.iter().sum::<f64>() / self.samples.len() as f64)
    }

    pub fn extend(&mut self, other: TtcSamples) {
        self.samples.extend(other.samples);
        self.censored += other.censored;
    }
}

/// One sample per receiver visit: time from `origin` until harvested power
/// first becomes non-zero.
pub fn time_to_charge_samples(trace: &SimTrace, origin: TtcOrigin) -> TtcSamples {
    struct Visit {
        appear: SimTime,
        first_req: Option<SimTime>,
        charged: bool,
    }
    let mut out = TtcSamples::default();
    let mut visit: Option<Visit> = None;
    let mut harvesting = false;
    let close = |v: Option<Visit>, out: &mut TtcSamples| {
        if let Some(v) = v {
            if !v.charged {
                out.censored += 1;
            }
        }
    };
    for e in &trace.entries {
        match &e.record {
            Record::Appear { .. } => {
                close(visit.take(), &mut out);
                visit = Some(Visit { appear: e.time, first_req: None, charged: false });
            }
            Record::Depart { .. } => close(visit.take(), &mut out),
            Record::Sent { msg } if msg.kind == MessageKind::ReqCrg && msg.src == trace.erx => {
                if let Some(v) = visit.as_mut() {
                    v.first_req.get_or_insert(e.time);
                }
            }
            Record::RxPower { p_harvested, .. } => {
                harvesting = *p_harvested > 0.0;
            }
            _ => {}
        }
        if harvesting {
            if let Some(v) = visit.as_mut().filter(|v| !v.charged) {
                v.charged = true;
                let start = match origin {
                    TtcOrigin::Appearance => v.appear,
                    TtcOrigin::FirstRequest => v.first_req.unwrap_or(e.time),
                };
                out.samples.push(e.time.saturating_sub(start).as_secs_f64());
            }
        }
    }
    close(visit, &mut out);
    out
}

/// Beaconing: the wait for the next periodic request is uniform over one
/// ping period. Clamped outside `[0, t_ping]`.
pub fn beaconing_ttc_cdf(t: f64, t_ping: f64) -> f64 {
    (t / t_ping).clamp(0.0, 1.0)
}

/// Probability that the receiver is first charged in probing round `i`
/// (1-based) when `k` of the `n` chargers that hear it can charge it and
/// every failed charger is blacklisted.
pub fn probing_round_prob(i: usize, n: usize, k: usize) -> f64 {
    if k == 0 || k > n || i == 0 || i > n - k + 1 {
        return 0.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    let miss: f64 = (0..i - 1).map(|j| (nf - j as f64 - kf) / (nf - j as f64)).product();
    kf / (nf - (i - 1) as f64) * miss
}

/// Step index used by the staircase model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StaircaseIndex {
    /// `floor((t - T_opt) / T_pes) + 1`: round `i` completes at
    /// `T_opt + (i - 1) T_pes`.
    #[default]
    Corrected,
    /// `floor((t - T_opt) / T_pes - 1)`, two steps later than `Corrected`.
    AsPrinted,
}

/// Optimistic and pessimistic round lengths: mean wait for the next ping,
/// plus the receiver's power wait when the round fails.
pub fn probing_round_lengths(params: &ProtocolParams) -> (f64, f64) {
    let t_opt = params.t_ping / 2.0;
    (t_opt, t_opt + params.t_wait_for_pwr)
}

fn step_count(t: f64, n: usize, k: usize, params: &ProtocolParams, index: StaircaseIndex) -> usize {
    let (t_opt, t_pes) = probing_round_lengths(params);
    let x = (t - t_opt) / t_pes;
    let f = match index {
        StaircaseIndex::Corrected if t < t_opt => return 0,
        StaircaseIndex::Corrected => x.floor() + 1.0,
        StaircaseIndex::AsPrinted => (x - 1.0).floor(),
    };
    if f <= 0.0 {
        0
    } else {
        (f as usize).min(n - k + 1)
    }
}

pub fn probing_ttc_cdf(t: f64, n: usize, k: usize, params: &ProtocolParams, index: StaircaseIndex) -> f64 {
    if k == 0 || k > n || t < 0.0 {
        return 0.0;
    }
    (1..=step_count(t, n, k, params, index)).map(|i| probing_round_prob(i, n, k)).sum::<f64>().min(1.0)
}

/// Where the staircase reaches 1 under the corrected index.
pub fn probing_ttc_domain_end(n: usize, k: usize, params: &ProtocolParams) -> f64 {
    let (t_opt, t_pes) = probing_round_lengths(params);
    (n - k) as f64 * t_pes + t_opt
}

/// Instant at which the staircase takes step `i`.
pub fn probing_step_time(i: usize, params: &ProtocolParams, index: StaircaseIndex) -> f64 {
    let (t_opt, t_pes) = probing_round_lengths(params);
    match index {
        StaircaseIndex::Corrected => t_opt + (i as f64 - 1.0) * t_pes,
        StaircaseIndex::AsPrinted => t_opt + (i as f64 + 1.0) * t_pes,
    }
}

/// Mean of the staircase distribution.
pub fn probing_ttc_mean(n: usize, k: usize, params: &ProtocolParams, index: StaircaseIndex) -> f64 {
    (1..=n.saturating_sub(k) + 1)
        .map(|i| probing_round_prob(i, n, k) * probing_step_time(i, params, index))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> EmpiricalCdf {
        let mut sorted: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
        sorted.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&x| x <= t) as f64 / self.sorted.len() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `(t, F(t))` at every distinct sample.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = (i + 1) as f64 / n,
                _ => out.push((x, (i + 1) as f64 / n)),
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_s,cdf\n");
        for (t, f) in self.points() {
            s.push_str(&format!("{t:.6},{f:.6}\n"));
        }
        s
    }

    /// Kolmogorov-Smirnov distance to a continuous reference CDF.
    pub fn ks_distance(&self, reference: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = reference(x);
            d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
        }
        d
    }
}
