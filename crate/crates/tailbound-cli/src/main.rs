//! Command line front end: stock figure recipes, config-file sweeps,
//! and the validation suites.

mod scenario;
mod sweep;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use tailbound::scenarios;

use scenario::Scenario;

/// Relative --out paths are joined to this directory when it is set.
const OUT_DIR_ENV: &str = "TAILBOUND_OUT_DIR";

fn common_args(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("seed")
            .long("seed")
            .value_parser(value_parser!(u64))
            .help("Master seed overriding the scenario default"),
    )
    .arg(
        Arg::new("out")
            .long("out")
            .value_parser(value_parser!(PathBuf))
            .help("Write the table to this file instead of stdout"),
    )
    .arg(
        Arg::new("json")
            .long("json")
            .action(ArgAction::SetTrue)
            .help("Emit JSON instead of CSV"),
    )
    .arg(
        Arg::new("inf-theta")
            .long("inf-theta")
            .action(ArgAction::SetTrue)
            .help("Minimize the delay bound over the QoS exponent"),
    )
    .arg(
        Arg::new("random-drop")
            .long("random-drop")
            .action(ArgAction::SetTrue)
            .help("Redraw UE distances uniformly from the seed"),
    )
    .arg(
        Arg::new("verify-exhaustive")
            .long("verify-exhaustive")
            .action(ArgAction::SetTrue)
            .help("Cross-check every pilot search against the exhaustive scan"),
    )
}

fn build_cli() -> Command {
    let mut cmd = Command::new("tailbound")
        .about("Delay-violation bounds and resource optimization for uplink massive MIMO")
        .after_help(format!(
            "Relative --out paths are joined to ${OUT_DIR_ENV} when it is set."
        ))
        .subcommand_required(true)
        .arg_required_else_help(true);
    cmd = cmd.subcommand(common_args(
        Command::new("sweep")
            .about("Run the sweep described by a key=value config file")
            .arg(
                Arg::new("config")
                    .long("config")
                    .required(true)
                    .value_parser(value_parser!(PathBuf))
                    .help("Scenario file; see the project README for the key table"),
            ),
    ));
    cmd = cmd.subcommand(
        Command::new("validate")
            .about("Run the self-check suites")
            .arg(
                Arg::new("seed")
                    .long("seed")
                    .value_parser(value_parser!(u64))
                    .help("Master seed for every suite"),
            )
            .arg(
                Arg::new("json")
                    .long("json")
                    .action(ArgAction::SetTrue)
                    .help("Emit the report as JSON"),
            )
            .arg(
                Arg::new("suites")
                    .long("suites")
                    .value_delimiter(',')
                    .help("Comma-separated subset of snc,pilot,power,queue,gamma"),
            ),
    );
    cmd = cmd.subcommand(Command::new("list-recipes").about("Name every stock recipe"));
    for p in scenarios::all(1) {
        cmd = cmd.subcommand(common_args(Command::new(p.name).about(p.blurb)));
    }
    cmd
}

fn main() -> ExitCode {
    let matches = build_cli().get_matches();
    match matches.subcommand() {
        Some(("sweep", m)) => run_config_sweep(m),
        Some(("validate", m)) => run_validate(m),
        Some(("list-recipes", _)) => {
            for p in scenarios::all(1) {
                println!("{:<10} {}", p.name, p.blurb);
            }
            ExitCode::SUCCESS
        }
        Some((name, m)) => run_recipe(name, m),
        None => unreachable!("subcommand is required"),
    }
}

fn fail2(msg: &str) -> ExitCode {
    eprintln!("tailbound: {msg}");
    ExitCode::from(2)
}

fn run_config_sweep(m: &ArgMatches) -> ExitCode {
    let path = m.get_one::<PathBuf>("config").expect("required argument");
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail2(&format!("cannot read {}: {e}", path.display())),
    };
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep").to_string();
    match scenario::parse_config(&text, &name, m.get_one::<u64>("seed").copied()) {
        Ok(sc) => finish_sweep(sc, m),
        Err(e) => fail2(&e),
    }
}

fn run_recipe(name: &str, m: &ArgMatches) -> ExitCode {
    let seed = m.get_one::<u64>("seed").copied().unwrap_or(1);
    match scenarios::by_name(name, seed) {
        Some(p) => finish_sweep(Scenario::from_preset(p), m),
        None => fail2(&format!("unknown recipe `{name}`")),
    }
}

fn finish_sweep(mut sc: Scenario, m: &ArgMatches) -> ExitCode {
    if m.get_flag("inf-theta") {
        sc.inf_theta = true;
    }
    if m.get_flag("random-drop") {
        sc.distances = scenarios::random_distances(&sc.cfg, sc.seed);
    }
    let verify = m.get_flag("verify-exhaustive");
    let out = sweep::run_sweep(&sc, verify);
    let rendered = if m.get_flag("json") {
        let mut s = serde_json::to_string_pretty(&sweep::to_json(&sc, &out))
            .expect("rows only hold plain scalars");
        s.push('\n');
        s
    } else {
        sweep::to_csv(&sc, &out)
    };
    if let Some(path) = m.get_one::<PathBuf>("out") {
        let target = resolve_out(path);
        if let Some(parent) = target.parent() {
            if !parent.as_os_str().is_empty() {
                if let Err(e) = std::fs::create_dir_all(parent) {
                    return fail2(&format!("cannot create {}: {e}", parent.display()));
                }
            }
        }
        if let Err(e) = std::fs::write(&target, rendered) {
            return fail2(&format!("cannot write {}: {e}", target.display()));
        }
    } else {
        print!("{rendered}");
    }
    if verify && !out.verify_ok {
        eprintln!("tailbound: pilot search disagreed with the exhaustive scan");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

/// Absolute paths pass through; relative ones land in $TAILBOUND_OUT_DIR
/// when the variable is set and nonempty.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn run_validate(m: &ArgMatches) -> ExitCode {
    let seed = m.get_one::<u64>("seed").copied().unwrap_or(1);
    let filter: Vec<String> = m
        .get_many::<String>("suites")
        .map(|v| v.cloned().collect())
        .unwrap_or_default();
    let report = match validate::run(&filter, seed) {
        Ok(r) => r,
        Err(e) => return fail2(&e),
    };
    if m.get_flag("json") {
        let v = serde_json::json!({
            "seed": seed,
            "passed": report.suites.iter().filter(|s| s.passed).count(),
            "total": report.suites.len(),
            "suites": report.suites.iter().map(|s| serde_json::json!({
                "name": s.name,
                "passed": s.passed,
                "detail": s.detail,
            })).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("plain strings"));
    } else {
        for s in &report.suites {
            let tag = if s.passed { "PASS" } else { "FAIL" };
            println!("suite {}: {tag} - {}", s.name, s.detail);
        }
        println!(
            "validate: {}/{} suites passed",
            report.suites.iter().filter(|s| s.passed).count(),
            report.suites.len()
        );
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
