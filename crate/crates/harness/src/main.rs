use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use starkqfi_cli::config::KEYS;
use starkqfi_cli::{run, Experiment, ExperimentConfig, RawConfig, RunError};

const SUBCOMMANDS: [(Experiment, &str); 6] = [
    (Experiment::EqSweep, "equilibrium QFI over an (a, L, h) grid"),
    (Experiment::DynSweep, "time-dependent QFI over an (a, L, h) grid"),
    (Experiment::BoundCheck, "analytic lower bound against the exact QFI at h = 0"),
    (Experiment::GapScan, "ground-state gap over an (a, L) grid"),
    (Experiment::Fit, "exponential or power-law fits of a CSV column"),
    (Experiment::Reproduce, "run a pinned figure preset"),
];

fn cli() -> Command {
    let mut cmd = Command::new("starkqfi")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Quantum Fisher information of Stark probes")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (kind, about) in SUBCOMMANDS {
        let mut sub = Command::new(kind.name()).about(about).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("flat key = value file; flags override it"),
        );
        for (key, help) in KEYS {
            sub = sub.arg(
                Arg::new(*key)
                    .long(*key)
                    .value_name("VALUE")
                    .action(ArgAction::Set)
                    .allow_hyphen_values(true)
                    .help(*help),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn config_from(kind: Experiment, m: &ArgMatches) -> Result<ExperimentConfig, RunError> {
    let mut raw = match m.get_one::<PathBuf>("config") {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    for (key, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            raw.set(key, v)?;
        }
    }
    Ok(ExperimentConfig::from_raw(kind, raw)?)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let kind = SUBCOMMANDS
        .iter()
        .map(|(k, _)| *k)
        .find(|k| k.name() == name)
        .expect("clap only accepts known subcommands");
    let result = config_from(kind, sub).and_then(|cfg| run(&cfg));
    match result {
        Ok(summary) => {
            for path in &summary.outputs {
                println!("{}", path.display());
            }
            eprintln!("{} points ok, {} failed", summary.ok, summary.failed);
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
