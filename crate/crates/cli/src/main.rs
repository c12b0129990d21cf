use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cqss_core::harness::{
    eve_curve, mstar_sweep, noinfo_sweep, resource_table, run_scenario, HarnessError, ResourceTable,
    ScenarioConfig,
};
use serde::Serialize;

const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "cqss", version, about = "Controlled quantum secret sharing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every trial of a scenario and report outcomes, fidelity and detection.
    Run(Common),
    /// Audit the players' state over a sweep of withheld record sets.
    Noinfo(Common),
    /// Escape frequency of an intercept-resend attacker against the decoy count.
    Eve(Common),
    /// Smallest number of releasing controllers that allows reconstruction.
    Mstar(Common),
    /// Entanglement and measurement counts of one run.
    Resources(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Override the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Print a summary (-v) or every check (-vv) to standard error.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

struct Outcome {
    text: String,
    pass: bool,
    summary: Vec<String>,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn resources_text(t: &ResourceTable) -> String {
    let mut s = String::new();
    let r = &t.report;
    let e = &t.expected;
    let rows: [(&str, String); 13] = [
        ("scenario", t.scenario.clone()),
        ("secret_width", t.secret_width.to_string()),
        ("split_records", t.split_records.to_string()),
        ("epr_player", r.epr_player.to_string()),
        ("epr_controller", r.epr_controller.to_string()),
        ("dealer_measurements", r.dealer_measurements.to_string()),
        ("controller_measurements", r.controller_measurements.to_string()),
        ("decoy_overhead", r.decoy_overhead.to_string()),
        ("expected_epr_player", e.epr_player.to_string()),
        ("expected_epr_controller", e.epr_controller.to_string()),
        ("expected_dealer_measurements", e.dealer_measurements.to_string()),
        ("total_epr", (r.epr_player + r.epr_controller).to_string()),
        ("matches", t.matches.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

fn execute(command: &Command, cfg: &ScenarioConfig) -> Result<Outcome, HarnessError> {
    Ok(match command {
        Command::Run(_) => {
            let report = run_scenario(cfg)?;
            let a = &report.aggregate;
            let mut summary = vec![format!(
                "{}: {}/{} recovered, mean fidelity {:?}, detection frequency {}",
                report.scenario, a.recovered, a.trials, a.mean_fidelity, a.detection_frequency
            )];
            summary.extend(
                report
                    .checks
                    .iter()
                    .map(|c| format!("{} {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail)),
            );
            Outcome {
                pass: report.passed(),
                text: json(&report),
                summary,
            }
        }
        Command::Noinfo(_) => {
            let report = noinfo_sweep(cfg)?;
            let mut summary = vec![format!("{}: {} withheld sets audited", report.scenario, report.audits.len())];
            summary.extend(report.audits.iter().map(|a| {
                format!(
                    "{} withheld {:?}: trace distance {:e}",
                    if a.pass { "pass" } else { "FAIL" },
                    a.withheld,
                    a.trace_distance
                )
            }));
            Outcome {
                pass: report.pass,
                text: json(&report),
                summary,
            }
        }
        Command::Eve(_) => {
            let curve = eve_curve(cfg)?;
            let mut summary = vec![format!("{}: {} decoy counts", curve.scenario, curve.points.len())];
            summary.extend(curve.points.iter().map(|p| {
                format!(
                    "{} M={}: escape {:.4} vs {:.4} (sigma {:.4})",
                    if p.pass { "pass" } else { "FAIL" },
                    p.decoys,
                    p.escape_frequency,
                    p.predicted_escape,
                    p.sigma
                )
            }));
            Outcome {
                pass: curve.pass,
                text: json(&curve),
                summary,
            }
        }
        Command::Mstar(_) => {
            let table = mstar_sweep(cfg)?;
            let mut summary = vec![format!("m* = {:?}, k = {}", table.m_star, table.threshold)];
            summary.extend(
                table
                    .rows
                    .iter()
                    .map(|r| format!("r={}: {}/{} subsets recover", r.released, r.recovered, r.subsets)),
            );
            Outcome {
                pass: table.matches_threshold,
                text: json(&table),
                summary,
            }
        }
        Command::Resources(_) => {
            let table = resource_table(cfg)?;
            Outcome {
                pass: table.matches,
                summary: vec![format!("resources match closed form: {}", table.matches)],
                text: resources_text(&table),
            }
        }
    })
}

fn load(common: &Common) -> Result<ScenarioConfig, String> {
    let path: &Path = &common.scenario;
    if !path.exists() {
        return Err(format!("scenario file not found: {}", path.display()));
    }
    let mut cfg = ScenarioConfig::load(path).map_err(|e| e.to_string())?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Run(c) | Command::Noinfo(c) | Command::Eve(c) | Command::Mstar(c) | Command::Resources(c) => c,
    };
    let cfg = match load(common) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match execute(&cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
        None => print!("{}", outcome.text),
    }
    let shown = match common.verbose {
        0 => 0,
        1 => 1,
        _ => outcome.summary.len(),
    };
    for line in outcome.summary.iter().take(shown) {
        eprintln!("{line}");
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        if common.verbose == 0 {
            eprintln!("assertion failed; rerun with -vv for details");
        }
        ExitCode::from(EXIT_ASSERTION)
    }
}
