use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use conullity_cli::scenarios::{find, SCENARIOS};
use conullity_cli::OUTPUT_DIR_ENV;

#[derive(Parser)]
#[command(
    name = "conullity",
    version,
    about = "Run the conullity-two metric check suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in a TOML config; exit 0 if every check passes,
    /// 1 if any fails, 2 on a config error.
    Run { config: PathBuf },
    /// List the available scenarios.
    ListScenarios,
    /// Show the checks and CSV tables of a scenario.
    Describe { scenario: String },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match conullity_cli::run(&config) {
            Ok((report, dir)) => {
                let total = report.checks().count();
                let failed: Vec<_> = report.checks().filter(|(_, c)| !c.passed).collect();
                println!(
                    "{}: {} checks, {} failed; report in {}",
                    report.scenario,
                    total,
                    failed.len(),
                    dir.join("report.txt").display()
                );
                for (s, c) in &failed {
                    let w = c.witness.as_deref().unwrap_or(&c.detail);
                    eprintln!("FAIL {}/{} [{}]: {w}", s.scenario, c.name, c.subject);
                }
                if failed.is_empty() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::ListScenarios => {
            for s in SCENARIOS {
                println!("{:<18} {}", s.name, s.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Describe { scenario } => match find(&scenario) {
            Some(s) => {
                println!("{}: {}", s.name, s.summary);
                if s.name == "all" {
                    println!(
                        "runs: {}",
                        SCENARIOS
                            .iter()
                            .filter(|o| o.name != "all")
                            .map(|o| o.name)
                            .collect::<Vec<_>>()
                            .join(", ")
                    );
                }
                if !s.checks.is_empty() {
                    println!("checks:");
                    for c in s.checks {
                        println!("  {c}");
                    }
                }
                if !s.tables.is_empty() {
                    println!("csv:");
                    for t in s.tables {
                        println!("  {t}");
                    }
                }
                println!("outputs go to report.txt in output_dir (override with {OUTPUT_DIR_ENV})");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown scenario `{scenario}`; try `conullity list-scenarios`");
                ExitCode::from(2)
            }
        },
    }
}
