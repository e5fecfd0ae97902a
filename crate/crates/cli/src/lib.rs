//! Command-line driver: argument and config resolution, dispatch, exit codes.

pub mod commands;
pub mod config;
pub mod verify;

use clap::{Arg, ArgAction, ArgMatches, Command};
use config::{parse_config, RunConfig, KEYS};
use std::path::PathBuf;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const SUBCOMMANDS: &[(&str, &str)] = &[
    ("sample", "Write sampled spectra as CSV (sample_index,re,im,is_real)"),
    ("clt", "Monte Carlo linear statistic with cumulant normality checks"),
    ("universality", "Compare two atom distributions on the same statistic"),
    ("kernel-table", "Tabulate the correlation kernel entries S, D, I as CSV"),
    ("variance", "Exact finite-n, limiting and Monte Carlo variance side by side"),
    ("verify", "Run an exact-identity suite"),
    ("classical", "Export the classical density and positions of the hermitized matrix"),
];

const BOOL_KEYS: &[&str] = &["no_timestamp", "timing"];

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn cli() -> Command {
    let mut common: Vec<Arg> = vec![Arg::new("config")
        .long("config")
        .value_name("PATH")
        .value_parser(clap::value_parser!(PathBuf))
        .help("Read `key = value` settings from PATH; flags override them")];
    for &key in KEYS {
        let arg = Arg::new(key).long(flag_name(key));
        common.push(if BOOL_KEYS.contains(&key) { arg.action(ArgAction::SetTrue) } else { arg.value_name("VALUE") });
    }
    let mut cmd = Command::new("ginibre")
        .about("Linear statistics of Ginibre-type random matrices")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for &(name, about) in SUBCOMMANDS {
        cmd = cmd.subcommand(Command::new(name).about(about).args(common.clone()));
    }
    cmd
}

/// Defaults, then the config file, then flags.
fn resolve(name: &str, m: &ArgMatches) -> Result<RunConfig, String> {
    let mut cfg = match m.get_one::<PathBuf>("config") {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    cfg.subcommand = name.to_string();
    for &key in KEYS {
        if BOOL_KEYS.contains(&key) {
            if m.get_flag(key) {
                cfg.set(key, "true")?;
            }
        } else if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v).map_err(|e| format!("--{}: {e}", flag_name(key)))?;
        }
    }
    Ok(cfg.resolved())
}

/// Runs the program on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let Some((name, sub)) = matches.subcommand() else {
        return EXIT_USAGE;
    };
    let cfg = match resolve(name, sub) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match commands::dispatch(&cfg) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(commands::Failure::Usage(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(commands::Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}
