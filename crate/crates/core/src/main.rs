use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wptn::cli::{self, CliError, RunManifest, SolveMode, TtcConfig};
use wptn::engine::Scenario;
use wptn::par::Exec;
use wptn::protocols::Protocol;

#[derive(Parser)]
#[command(name = "wptn", version, about = "Charge-control protocol simulator for wireless power transfer networks")]
struct Args {
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a scenario over protocols, thresholds and seeds.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma separated, or `all`. Defaults to the scenario's protocol.
        #[arg(long)]
        protocol: Option<String>,
        /// Comma separated. Defaults to the scenario's seed.
        #[arg(long)]
        seeds: Option<String>,
        /// Comma separated, e.g. `--thresholds-dbm=-70,-60`.
        #[arg(long, allow_hyphen_values = true)]
        thresholds_dbm: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Skip the per-run trace files.
        #[arg(long)]
        metrics_only: bool,
    },
    /// Empirical time to charge against the analytical CDF.
    Ttc {
        #[arg(long)]
        protocol: Protocol,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Base seed; trial `t` uses `seed + t`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Where to write the CDF table; printed if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a charger-activation knapsack instance.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "pii-exact")]
        mode: SolveMode,
    },
    /// Check a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Emit the per-charger reference series.
    Reference {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in scenario as TOML.
    Template {
        #[arg(long, default_value = "los")]
        name: String,
    },
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| CliError::Validation(format!("--{what}: '{x}': {e}"))))
        .collect()
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Internal(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    match args.cmd {
        Cmd::Run { scenario, protocol, seeds, thresholds_dbm, out, metrics_only } => {
            let sc = Scenario::load(&scenario)?;
            let mut m = RunManifest::single(sc, out);
            m.write_traces = !metrics_only;
            if let Some(p) = protocol {
                m.protocols = if p == "all" { Protocol::ALL.to_vec() } else { list(&p, "protocol")? };
            }
            if let Some(s) = seeds {
                m.seeds = list(&s, "seeds")?;
            }
            if let Some(t) = thresholds_dbm {
                m.thresholds_dbm = list(&t, "thresholds-dbm")?;
            }
            let reports = cli::cmd_run(&m, exec)?;
            println!("{} runs written to {}", reports.len(), m.out.display());
        }
        Cmd::Ttc { protocol, n, k, trials, seeds, out } => {
            let r = cli::cmd_ttc(&TtcConfig { protocol, n, k, trials, seed: seeds }, exec)?;
            emit(out.as_ref(), &r.csv)?;
            let mean = r.mean_s.map_or("NA".to_string(), |m| format!("{m:.4}"));
            eprintln!(
                "{protocol} n={n} k={k}: {} samples, {} censored, mean {mean} s (analytical {:.4} s), KS {:.4}",
                r.samples.len(),
                r.censored,
                r.analytic_mean_s,
                r.ks
            );
        }
        Cmd::Solve { instance, mode } => {
            let text = cli::read_to_string(&instance)?;
            print!("{}", cli::cmd_solve(&text, mode)?);
        }
        Cmd::Validate { scenario } => println!("{}", cli::cmd_validate(&scenario)?),
        Cmd::Reference { scenario, seeds, out } => {
            let mut sc = Scenario::load(&scenario)?;
            if let Some(s) = seeds {
                sc = sc.with_seed(s);
            }
            emit(out.as_ref(), &cli::cmd_reference(&sc)?)?;
        }
        Cmd::Template { name } => {
            let sc = match name.as_str() {
                "los" => Scenario::default_los(),
                "nlos" => Scenario::default_non_los(),
                other => return Err(CliError::Validation(format!("unknown template '{other}' (los or nlos)"))),
            };
            print!("{}", sc.to_toml_string());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
