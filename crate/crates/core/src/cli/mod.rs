//! Library side of the command-line tool. Every subcommand is a plain
//! function here so tests can call it directly; `main.rs` only parses
//! arguments, prints and maps errors to exit codes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{self, reference_vector, EngineError, EtxConfig, Scenario, ScenarioError, ScenarioMeta, Waypoint};
use crate::metrics::{
    beaconing_ttc_cdf, evaluate, probing_round_lengths, probing_ttc_cdf, probing_ttc_mean, reports_to_csv,
    time_to_charge_samples, EmpiricalCdf, MetricsReport, StaircaseIndex, TtcOrigin,
};
use crate::optimize::{parse_instance, solve_pi, solve_pii_exact, solve_pii_greedy, OptimizeError, Solution};
use crate::par::{self, Exec};
use crate::protocols::Protocol;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}

/// The thresholds swept by default, in dBm.
pub const DEFAULT_THRESHOLDS_DBM: [f64; 5] = [-70.0, -65.0, -60.0, -55.0, -50.0];

/// One sweep: every combination of protocol, threshold and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub scenario: Scenario,
    pub protocols: Vec<Protocol>,
    pub seeds: Vec<u64>,
    pub thresholds_dbm: Vec<f64>,
    pub out: PathBuf,
    /// Write one trace file per cell next to `metrics.csv`.
    pub write_traces: bool,
}

impl RunManifest {
    /// Only the scenario's own protocol, seed and threshold.
    pub fn single(scenario: Scenario, out: PathBuf) -> RunManifest {
        RunManifest {
            protocols: vec![scenario.meta.protocol],
            seeds: vec![scenario.meta.seed],
            thresholds_dbm: vec![scenario.protocol_params.comm_threshold_dbm],
            scenario,
            out,
            write_traces: true,
        }
    }

    /// All three protocols, seeds 1 to 5 and the default threshold sweep.
    pub fn full(scenario: Scenario, out: PathBuf) -> RunManifest {
        RunManifest {
            scenario,
            protocols: Protocol::ALL.to_vec(),
            seeds: (1..=5).collect(),
            thresholds_dbm: DEFAULT_THRESHOLDS_DBM.to_vec(),
            out,
            write_traces: true,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario.validate()?;
        if self.seeds.is_empty() {
            return Err(CliError::Validation("seed list is empty".into()));
        }
        if self.protocols.is_empty() {
            return Err(CliError::Validation("protocol list is empty".into()));
        }
        if self.thresholds_dbm.is_empty() {
            return Err(CliError::Validation("threshold list is empty".into()));
        }
        if let Some(t) = self.thresholds_dbm.iter().find(|t| !t.is_finite()) {
            return Err(CliError::Validation(format!("threshold {t} is not finite")));
        }
        Ok(())
    }

    /// Scenarios in output order: protocol, then threshold, then seed.
    pub fn cells(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &p in &self.protocols {
            for &th in &self.thresholds_dbm {
                for &seed in &self.seeds {
                    out.push(self.scenario.clone().with_protocol(p).with_comm_threshold(th).with_seed(seed));
                }
            }
        }
        out
    }
}

pub fn trace_file_name(sc: &Scenario) -> String {
    format!("{}_{}_{}.csv", sc.meta.protocol, sc.protocol_params.comm_threshold_dbm, sc.meta.seed)
}

pub const METRICS_FILE: &str = "metrics.csv";

/// Simulates and evaluates every cell. Nothing is written.
pub fn sweep(manifest: &RunManifest, exec: Exec) -> Result<Vec<(Scenario, engine::SimTrace, MetricsReport)>, CliError> {
    manifest.validate()?;
    let cells = manifest.cells();
    par::map(exec, &cells, |sc| -> Result<_, CliError> {
        let trace = engine::run(sc)?;
        let report = evaluate(sc, &trace).map_err(|e| CliError::Internal(e.to_string()))?;
        Ok((sc.clone(), trace, report))
    })
    .into_iter()
    .collect()
}

/// Runs the sweep and writes one trace per cell plus `metrics.csv`.
/// Returns the metric reports in file order.
pub fn cmd_run(manifest: &RunManifest, exec: Exec) -> Result<Vec<MetricsReport>, CliError> {
    let results = sweep(manifest, exec)?;
    fs::create_dir_all(&manifest.out)
        .map_err(|e| CliError::Internal(format!("creating {}: {e}", manifest.out.display())))?;
    let mut reports = Vec::with_capacity(results.len());
    for (sc, trace, report) in results {
        if manifest.write_traces {
            write_file(&manifest.out.join(trace_file_name(&sc)), &trace.to_csv())?;
        }
        reports.push(report);
    }
    write_file(&manifest.out.join(METRICS_FILE), &reports_to_csv(&reports))?;
    Ok(reports)
}

pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    let sc = Scenario::load(path)?;
    let schedule = engine::schedule(&sc)?;
    Ok(format!(
        "{}: ok ({} chargers, {} waypoints x {} rounds, T_E = {} s for seed {})",
        path.display(),
        sc.etxs.len(),
        sc.erx_waypoints.len(),
        sc.meta.rounds,
        schedule.end,
        sc.meta.seed
    ))
}

/// Reference series as CSV: one row per grid instant, one 0/1 column per
/// charger.
pub fn cmd_reference(sc: &Scenario) -> Result<String, CliError> {
    let r = reference_vector(sc)?;
    let mut s = String::from("time_s");
    for id in &r.etxs {
        let _ = write!(s, ",{id}");
    }
    s.push('\n');
    for k in 0..r.len() {
        let _ = write!(s, "{}", crate::time::SimTime(k as u64 * r.period.0));
        for col in &r.values {
            s.push_str(if col[k] { ",1" } else { ",0" });
        }
        s.push('\n');
    }
    Ok(s)
}

/// Distance from the receiver to every charger in the proximity setup.
pub const TTC_RADIUS_M: f64 = 0.4;
/// Length of each time-to-charge trial.
pub const TTC_DWELL_S: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TtcConfig {
    pub protocol: Protocol,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
}

/// `n` chargers evenly spaced on a circle around the receiver, all facing
/// it and all within communication range; only the first `k` have their
/// power stage connected.
pub fn ttc_scenario(cfg: &TtcConfig, seed: u64) -> Scenario {
    let base = Scenario::default_los();
    let etxs = (0..cfg.n)
        .map(|j| {
            let angle = 360.0 * j as f64 / cfg.n as f64;
            let (s, c) = angle.to_radians().sin_cos();
            EtxConfig {
                id: j as u32 + 1,
                x: TTC_RADIUS_M * c,
                y: TTC_RADIUS_M * s,
                azimuth: angle + 180.0,
                tx_power_w: if j < cfg.k { None } else { Some(0.0) },
                comm_threshold_dbm: None,
            }
        })
        .collect::<Vec<_>>();
    let mut etxs = etxs;
    for e in &mut etxs {
        e.azimuth = crate::model::normalize_azimuth(e.azimuth);
    }
    Scenario {
        meta: ScenarioMeta { name: format!("ttc_n{}_k{}", cfg.n, cfg.k), protocol: cfg.protocol, rounds: 1, seed },
        etxs,
        erx_waypoints: vec![Waypoint {
            x: 0.0,
            y: 0.0,
            azimuth: 0.0,
            dwell_min_s: TTC_DWELL_S,
            dwell_max_s: TTC_DWELL_S,
            pause_s: 0.0,
        }],
        ..base
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtcResult {
    pub samples: Vec<f64>,
    pub censored: usize,
    pub ks: f64,
    pub mean_s: Option<f64>,
    /// Mean of the analytical distribution.
    pub analytic_mean_s: f64,
    /// `t_s,cdf_empirical,cdf_analytic`.
    pub csv: String,
}

/// Independent trials with seeds `seed, seed + 1, ...`; time to charge
/// counts from the receiver's arrival.
pub fn cmd_ttc(cfg: &TtcConfig, exec: Exec) -> Result<TtcResult, CliError> {
    if cfg.k == 0 {
        return Err(CliError::Validation("k must be at least 1: with no capable charger nothing can charge".into()));
    }
    if cfg.k > cfg.n {
        return Err(CliError::Validation(format!("k ({}) must not exceed n ({})", cfg.k, cfg.n)));
    }
    if cfg.trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }
    let runs = par::map_range(exec, cfg.trials, |t| -> Result<_, CliError> {
        let sc = ttc_scenario(cfg, cfg.seed.wrapping_add(t as u64));
        let trace = engine::run(&sc)?;
        Ok(time_to_charge_samples(&trace, TtcOrigin::Appearance))
    });
    let mut samples = Vec::with_capacity(cfg.trials);
    let mut censored = 0;
    for r in runs {
        let r = r?;
        samples.extend(r.samples);
        censored += r.censored;
    }
    let params = Scenario::default_los().protocol_params;
    let (n, k) = (cfg.n, cfg.k);
    let analytic = |t: f64| -> f64 {
        match cfg.protocol {
            Protocol::Beaconing => beaconing_ttc_cdf(t, params.t_ping),
            Protocol::Probing => probing_ttc_cdf(t, n, k, &params, StaircaseIndex::Corrected),
            Protocol::Freerun => f64::from(t >= 0.0),
        }
    };
    let analytic_mean_s = match cfg.protocol {
        Protocol::Beaconing => params.t_ping / 2.0,
        Protocol::Probing => probing_ttc_mean(n, k, &params, StaircaseIndex::Corrected),
        Protocol::Freerun => 0.0,
    };
    let ecdf = EmpiricalCdf::new(&samples);
    let ks = ecdf.ks_distance(analytic);
    let mut csv = String::from("t_s,cdf_empirical,cdf_analytic\n");
    for (t, f) in ecdf.points() {
        let _ = writeln!(csv, "{t:.6},{f:.6},{:.6}", analytic(t));
    }
    let mean_s = (!samples.is_empty()).then(|| samples.iter().sum::<f64>() / samples.len() as f64);
    Ok(TtcResult { samples, censored, ks, mean_s, analytic_mean_s, csv })
}

/// Step width of the probing staircase for the default parameters.
pub fn probing_step_width() -> f64 {
    probing_round_lengths(&Scenario::default_los().protocol_params).1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Pi,
    PiiExact,
    PiiGreedy,
}

impl std::str::FromStr for SolveMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pi" => Ok(SolveMode::Pi),
            "pii-exact" => Ok(SolveMode::PiiExact),
            "pii-greedy" => Ok(SolveMode::PiiGreedy),
            other => Err(format!("unknown mode '{other}' (expected pi, pii-exact or pii-greedy)")),
        }
    }
}

fn certificate(head: &str, sol: &Solution) -> String {
    let slack: Vec<String> = sol.slack.iter().map(|s| s.to_string()).collect();
    format!("{head}\nc = {}\nvalue = {}\nslack = {}\n", sol.c_string(), sol.value, slack.join(" "))
}

/// Solves an instance file and returns the printed certificate.
pub fn cmd_solve(text: &str, mode: SolveMode) -> Result<String, CliError> {
    let inst = parse_instance(text)?;
    Ok(match mode {
        SolveMode::Pi => match solve_pi(&inst)? {
            Some(sol) => certificate(&format!("yes (o_q = {})", inst.o_q), &sol),
            None => format!("no (no feasible activation reaches o_q = {})\n", inst.o_q),
        },
        SolveMode::PiiExact => match solve_pii_exact(&inst)? {
            Some(sol) => certificate("optimal", &sol),
            None => "infeasible (no activation satisfies every row)\n".to_string(),
        },
        SolveMode::PiiGreedy => match solve_pii_greedy(&inst) {
            Some(sol) => certificate("greedy", &sol),
            None => "greedy found no feasible activation\n".to_string(),
        },
    })
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
