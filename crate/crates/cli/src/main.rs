//! `carleson <study> [flags]`: runs a registered study, writes its report and
//! prints a JSON status line. Exit code 0 iff every gate passes, 1 on gate
//! failures, 2 on usage or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use carleson_core::experiments::{to_json_17, StudyConfig, StudyRegistry, StudyReport};
use carleson_core::normed_spaces::{Exponent, SpaceDescriptor};
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use serde_json::json;

fn common_args() -> Vec<Arg> {
    vec![
        Arg::new("config").long("config").value_name("PATH").value_parser(value_parser!(PathBuf)).help("JSON study config"),
        Arg::new("out").long("out").value_name("PATH").value_parser(value_parser!(PathBuf)).help("JSON report path; rows go to the .csv sibling"),
        Arg::new("seed").long("seed").value_parser(value_parser!(u64)),
        Arg::new("grid-j").long("grid-j").value_parser(value_parser!(usize)),
        Arg::new("grid-m").long("grid-m").value_parser(value_parser!(usize)),
        Arg::new("depth").long("depth").value_parser(value_parser!(usize)),
        Arg::new("q").long("q").value_name("LIST").help("comma-separated exponents q"),
        Arg::new("p").long("p").value_name("LIST").help("comma-separated exponents p (inf allowed)"),
        Arg::new("space").long("space").value_name("P,D").help("target space l^P_D"),
        Arg::new("refine").long("refine").value_parser(value_parser!(usize)).help("refinement levels beyond the base grid"),
        Arg::new("print").long("print").action(ArgAction::SetTrue).help("print the full report instead of the status line"),
    ]
}

fn cli(registry: &StudyRegistry) -> Command {
    let mut cmd = Command::new("carleson")
        .about("Numerical studies of vector-valued BMO and Carleson functionals")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(Command::new("list").about("list the registered studies"));
    for s in registry.iter() {
        cmd = cmd.subcommand(Command::new(s.name()).about(s.description()).args(common_args()));
    }
    cmd
}

fn parse_list<T>(raw: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| parse(s).with_context(|| format!("cannot parse {s:?} in {raw:?}")))
        .collect()
}

fn build_config(study: &str, m: &ArgMatches) -> Result<StudyConfig> {
    let mut config = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let c: StudyConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if !c.study.is_empty() && c.study != study {
                bail!("config is for study {:?}, not {study:?}", c.study);
            }
            c
        }
        None => StudyConfig::default(),
    };
    config.study = study.to_string();
    if let Some(s) = m.get_one::<u64>("seed") {
        config.seed = Some(*s);
    }
    if let Some(j) = m.get_one::<usize>("grid-j") {
        config.grid.j = Some(*j);
    }
    if let Some(v) = m.get_one::<usize>("grid-m") {
        config.grid.m = Some(*v);
    }
    if let Some(d) = m.get_one::<usize>("depth") {
        config.grid.depth = Some(*d);
    }
    if let Some(r) = m.get_one::<usize>("refine") {
        config.refine = Some(*r);
    }
    if let Some(q) = m.get_one::<String>("q") {
        config.q = Some(parse_list(q, |s| s.trim().parse().ok())?);
    }
    if let Some(p) = m.get_one::<String>("p") {
        config.p = Some(parse_list(p, Exponent::parse)?);
    }
    if let Some(sp) = m.get_one::<String>("space") {
        let (p, d) = sp.split_once(',').with_context(|| format!("--space expects P,D, got {sp:?}"))?;
        config.space = Some(SpaceDescriptor {
            p: Exponent::parse(p).with_context(|| format!("bad p in --space {sp:?}"))?,
            d: d.trim().parse().with_context(|| format!("bad d in --space {sp:?}"))?,
        });
    }
    if let Some(o) = m.get_one::<PathBuf>("out") {
        config.out = Some(o.clone());
    }
    Ok(config)
}

fn status(report: &StudyReport) -> String {
    let failures: Vec<_> = report
        .failures()
        .into_iter()
        .map(|g| {
            json!({
                "name": g.name,
                "comparison": g.comparison,
                "threshold": g.threshold,
                "value": g.value,
                "coarse_value": g.coarse_value,
            })
        })
        .collect();
    let flagged: Vec<_> = report.gates.iter().filter(|g| g.flagged).map(|g| g.name.clone()).collect();
    to_json_17(&json!({
        "study": report.study,
        "passed": report.passed(),
        "gates": report.gates.len(),
        "failures": failures,
        "flagged": flagged,
    }))
}

fn run(registry: &StudyRegistry, matches: &ArgMatches) -> Result<bool> {
    let (name, m) = matches.subcommand().expect("subcommand is required");
    if name == "list" {
        for s in registry.iter() {
            println!("{:<12} {}", s.name(), s.description());
        }
        return Ok(true);
    }
    let config = build_config(name, m)?;
    let report = registry.run(name, &config)?;
    if let Some(out) = &report.config.out {
        report.write(out)?;
    }
    if m.get_flag("print") {
        println!("{}", report.to_json());
    } else {
        println!("{}", status(&report));
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let registry = StudyRegistry::builtin();
    let matches = cli(&registry).get_matches();
    match run(&registry, &matches) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
