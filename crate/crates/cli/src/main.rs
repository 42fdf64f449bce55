//! Command-line front end: `run`, `sweep`, `verify-membership` and
//! `report`. Exit status 2 means a configuration error, 3 a solver or
//! report failure.

mod summary;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use euler2d::harness::{
    default_cap_schedule, membership_config, refinement_sweep, run, sweep_key, verify_membership, RawConfig, RunConfig,
    KEYS,
};
use euler2d::Error;

/// A failure with the exit status it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 2,
            _ => 3,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn key_args() -> Vec<Arg> {
    KEYS.iter()
        .map(|k| {
            let help = match k.default {
                Some(d) => format!("[{}] {} (default {d})", k.unit, k.help),
                None => format!("[{}] {}", k.unit, k.help),
            };
            Arg::new(k.name).long(k.name).value_name("VALUE").help(help).help_heading("Configuration keys")
        })
        .collect()
}

/// Key table for the top-level help.
fn keys_help() -> String {
    let mut s = String::from("Configuration keys, in the file as `key = value` or on the command line as `--key value`:\n");
    for k in KEYS {
        s.push_str(&format!("  {:<12} [{}] {}\n", k.name, k.unit, k.help));
    }
    s
}

fn command() -> Command {
    let config = || Arg::new("config").required(true).value_name("CONFIG").help("flat `key = value` file");
    Command::new("euler2d")
        .about("2D Euler runs and diagnostics for L (log L)^alpha initial vorticity")
        .after_help(keys_help())
        .subcommand_required(true)
        .arg(
            Arg::new("verbose")
                .short('v')
                .long("verbose")
                .action(ArgAction::Count)
                .global(true)
                .help("also print the report metadata"),
        )
        .subcommand(Command::new("run").about("run one configuration").arg(config()).args(key_args()))
        .subcommand(
            Command::new("sweep")
                .about("run a refinement sweep over eps (ES, VB) or nu (VV)")
                .arg(config())
                .arg(
                    Arg::new("levels")
                        .long("levels")
                        .required(true)
                        .value_name("CSV")
                        .help("comma-separated values of the swept key, at least three"),
                )
                .args(key_args()),
        )
        .subcommand(
            Command::new("verify-membership")
                .about("decide L (log L)^alpha membership of the preset from capped modulars")
                .arg(config())
                .args(key_args()),
        )
        .subcommand(
            Command::new("report")
                .about("summarize a run directory")
                .arg(Arg::new("run_dir").required(true).value_name("RUN_DIR")),
        )
}

/// Config file with command-line overrides applied.
fn effective_raw(m: &ArgMatches) -> Result<RawConfig, Failure> {
    let path = m.get_one::<String>("config").expect("required argument");
    let mut raw = RawConfig::load(Path::new(path))?;
    for k in KEYS {
        if let Some(v) = m.get_one::<String>(k.name) {
            raw.set(k.name, v);
        }
    }
    Ok(raw)
}

fn effective_config(m: &ArgMatches) -> Result<RunConfig, Failure> {
    let cfg = RunConfig::from_raw(&effective_raw(m)?)?;
    println!("# effective configuration");
    print!("{}", cfg.to_text());
    Ok(cfg)
}

fn cmd_run(m: &ArgMatches, verbose: u8) -> Result<(), Failure> {
    let cfg = effective_config(m)?;
    let out = run(&cfg)?;
    println!();
    print!("{}", summary::summarize(&out.report, verbose));
    println!("run directory: {}", out.dir.display());
    Ok(())
}

fn cmd_sweep(m: &ArgMatches) -> Result<(), Failure> {
    let cfg = effective_config(m)?;
    let text = m.get_one::<String>("levels").expect("required argument");
    let levels = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| Failure { code: 2, msg: format!("--levels: expected numbers, got {text:?}") })?;
    let res = refinement_sweep(&cfg, &levels)?;
    println!();
    println!("sweep over {} ({} levels)", sweep_key(cfg.method), levels.len());
    print!("{}", res.to_csv());
    let failed = res.levels.iter().filter(|l| l.failure.is_some()).count();
    if failed > 0 {
        return Err(Failure { code: 3, msg: format!("{failed} level(s) failed; see sweep.csv") });
    }
    Ok(())
}

fn cmd_membership(m: &ArgMatches) -> Result<(), Failure> {
    let (preset, alpha) = membership_config(&effective_raw(m)?)?;
    let v = verify_membership(&preset, alpha, &default_cap_schedule())?;
    println!("preset {} with beta = {}, alpha = {alpha}", preset.name, preset.params.beta);
    println!("log10_cap,modular");
    for p in &v.trace {
        println!("{},{}", p.log10_cap, p.modular);
    }
    println!("verdict: {}", v.verdict);
    Ok(())
}

fn cmd_report(m: &ArgMatches, verbose: u8) -> Result<(), Failure> {
    let dir = PathBuf::from(m.get_one::<String>("run_dir").expect("required argument"));
    let report = summary::load(&dir).map_err(|msg| Failure { code: 3, msg })?;
    print!("{}", summary::summarize(&report, verbose));
    Ok(())
}

fn main() -> ExitCode {
    let matches = command().get_matches();
    let verbose = matches.get_count("verbose");
    let result = match matches.subcommand() {
        Some(("run", m)) => cmd_run(m, verbose),
        Some(("sweep", m)) => cmd_sweep(m),
        Some(("verify-membership", m)) => cmd_membership(m),
        Some(("report", m)) => cmd_report(m, verbose),
        _ => unreachable!("subcommand is required"),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
