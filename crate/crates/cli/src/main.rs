//! `riplab`: batch runner for the restricted isometry experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 capacity exceeded,
//! 4 numerical failure.

mod commands;
mod config;
mod output;

use std::path::Path;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Arg, ArgAction, ArgMatches};

use commands::{commands, CliError, Command};
use config::{parse_config_file, Kind, Params};
use output::{emit, Header};

fn cli(cmds: &[Command]) -> clap::Command {
    let mut app = clap::Command::new("riplab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Restricted isometry experiments for structured measurement ensembles")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in cmds {
        let mut sub = clap::Command::new(c.name)
            .about(c.about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key=value file; flags override it"))
            .arg(Arg::new("out").long("out").value_name("PATH").help("write CSV here and the JSON summary to PATH.json"))
            .arg(Arg::new("seed").long("seed").value_name("U64").help("run seed [default: 0]"))
            .arg(Arg::new("stamp").long("stamp").action(ArgAction::SetTrue).help("add a timestamp to the header"))
            .arg(Arg::new("check").long("check").action(ArgAction::SetTrue).help("validate the configuration only"));
        for k in &c.keys {
            let value_name = match k.kind {
                Kind::Int => "INT",
                Kind::Float => "NUM",
                Kind::Bool => "BOOL",
                Kind::IntList => "LIST",
                Kind::Choice(_) => "VALUE",
            };
            let mut help = k.help.to_string();
            if let Kind::Choice(options) = k.kind {
                help.push_str(&format!(" ({})", options.join("|")));
            }
            if let Some(d) = k.default {
                help.push_str(&format!(" [default: {d}]"));
            } else if k.required {
                help.push_str(" [required]");
            }
            sub = sub.arg(Arg::new(k.name).long(k.name).value_name(value_name).help(help));
        }
        app = app.subcommand(sub);
    }
    app
}

fn collect_flags(cmd: &Command, sub: &ArgMatches) -> Vec<(String, String)> {
    let names = cmd.keys.iter().map(|k| k.name).chain(config::GLOBAL_KEYS.iter().copied());
    names.filter_map(|n| sub.get_one::<String>(n).map(|v| (n.to_string(), v.clone()))).collect()
}

fn print_check(diags: &[String]) {
    println!("{}", serde_json::to_string(diags).expect("strings serialize"));
}

fn fail(err: &CliError) -> ExitCode {
    for m in err.messages() {
        eprintln!("riplab: error: {m}");
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cmds = commands();
    let matches = cli(&cmds).get_matches();
    let Some((name, sub)) = matches.subcommand() else {
        return ExitCode::from(2);
    };
    let cmd = cmds.iter().find(|c| c.name == name).expect("clap only accepts known subcommands");
    let check = sub.get_flag("check");

    let file = match sub.get_one::<String>("config") {
        Some(path) => match parse_config_file(Path::new(path)) {
            Ok(entries) => entries,
            Err(diags) => {
                if check {
                    print_check(&diags);
                }
                return fail(&CliError::Config(diags));
            }
        },
        None => Vec::new(),
    };
    let (params, diags) = Params::resolve(&cmd.keys, file, collect_flags(cmd, sub));
    if !diags.is_empty() {
        if check {
            print_check(&diags);
        }
        return fail(&CliError::Config(diags));
    }

    match (cmd.run)(&params, check) {
        Ok(None) => {
            print_check(&[]);
            ExitCode::SUCCESS
        }
        Ok(Some(report)) => {
            let stamp = sub
                .get_flag("stamp")
                .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
            let header = Header { command: cmd.name, seed: params.seed, params: params.echo(), stamp };
            match emit(&header, &report, params.out().map(Path::new)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&CliError::Io(e)),
            }
        }
        Err(e) => {
            if check {
                print_check(&e.messages());
            }
            fail(&e)
        }
    }
}
