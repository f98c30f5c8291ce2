use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bbmkp_core::harness::{self, VerifyOptions};
use bbmkp_core::scenario::{load_scenario, Scenario};
use bbmkp_core::Error;
use clap::{Args, Parser, Subcommand};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "bbmkp-lab", version, about = "BBM / BBM-KP transverse-limit laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve both limiting BBM profiles and write bbm.csv.
    SimulateBbm(Io),
    /// Evolve the BBM-KP initial state and write bbmkp.csv.
    SimulateBbmkp(Io),
    /// Check the transverse-limit bound and tail decay; writes profile.csv,
    /// bounds.csv and report.json. Exit 0 on pass, 1 on fail.
    VerifyLimit {
        #[command(flatten)]
        io: Io,
        /// Comma-separated Sobolev indices, e.g. 1,2.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u32>>,
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long)]
        tail_ratio: Option<f64>,
        /// Negative control: replace u⁺ by 2u⁺ before the analysis.
        #[arg(long)]
        corrupt_uplus: bool,
    },
    /// Step-size and resolution studies; writes orders.csv.
    ConvergenceStudy(Io),
    /// Conserved quantities over time; writes invariants.csv and audit.json.
    EnergyAudit(Io),
}

fn report_error(kind: &str, message: &str) {
    let body = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{body}");
}

fn exit_for(err: &Error) -> ExitCode {
    report_error(err.kind(), &err.to_string());
    ExitCode::from(if err.is_config_error() { EXIT_USAGE } else { EXIT_NUMERICAL })
}

fn load(path: &Path) -> Result<Scenario, Error> {
    load_scenario(path)
}

fn write_audit_json(dir: &Path, audit: &harness::EnergyAudit) -> Result<String, Error> {
    let text = serde_json::to_string_pretty(audit).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("audit.json"), format!("{text}\n"))?;
    Ok(text)
}

fn run(command: Command) -> Result<bool, Error> {
    match command {
        Command::SimulateBbm(io) => {
            let scn = load(&io.scenario)?;
            harness::run_simulate_bbm(&scn, &io.out)?;
            println!("wrote {}", io.out.join("bbm.csv").display());
            Ok(true)
        }
        Command::SimulateBbmkp(io) => {
            let scn = load(&io.scenario)?;
            harness::run_simulate_bbmkp(&scn, &io.out)?;
            println!("wrote {}", io.out.join("bbmkp.csv").display());
            Ok(true)
        }
        Command::VerifyLimit {
            io,
            k,
            slack,
            tail_ratio,
            corrupt_uplus,
        } => {
            let scn = load(&io.scenario)?;
            let opts = VerifyOptions {
                k,
                slack,
                tail_ratio,
                corrupt_uplus,
            };
            let outcome = harness::run_verify_limit(&scn, &opts)?;
            harness::write_verify_outputs(&io.out, &outcome)?;
            let v = &outcome.report.verdict;
            println!(
                "{}: {} bound violations (worst ratio {:.6}), tail ratios at t={} +{:.4e} -{:.4e}",
                if v.pass { "PASS" } else { "FAIL" },
                v.bound_violations,
                v.worst_bound_ratio,
                v.final_time,
                v.final_tail_plus,
                v.final_tail_minus,
            );
            Ok(v.pass)
        }
        Command::ConvergenceStudy(io) => {
            let scn = load(&io.scenario)?;
            let rows = harness::run_convergence_study(&scn)?;
            harness::write_orders(&io.out, &rows)?;
            for r in &rows {
                println!(
                    "{:6} {:3} {:<10} error={:<24} order={:<20} {}",
                    r.solver,
                    r.study,
                    r.value,
                    r.error.map_or("-".into(), |e| format!("{e:e}")),
                    r.order.map_or("-".into(), |o| format!("{o:.4}")),
                    r.note
                );
            }
            Ok(true)
        }
        Command::EnergyAudit(io) => {
            let scn = load(&io.scenario)?;
            let audit = harness::run_energy_audit(&scn)?;
            harness::write_energy_audit(&io.out, &audit)?;
            println!("{}", write_audit_json(&io.out, &audit)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            // --help and --version
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            report_error("UsageError", err.to_string().trim_end());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(err) => exit_for(&err),
    }
}
