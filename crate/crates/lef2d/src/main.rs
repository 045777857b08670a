use std::path::PathBuf;
use std::process::ExitCode;

use lef2d::cli::{run_command, Command};
use lef2d::config::load_config;
use lef2d::error::Error;

const USAGE: &str = "usage: lef2d --config PATH --command NAME [--out DIR] [--seed N]
  commands: check | threshold | solve-radial | solve-annulus | verify | report";

fn main() -> ExitCode {
    match run() {
        Ok(summary) => {
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run() -> Result<String, Error> {
    let mut config_path: Option<PathBuf> = None;
    let mut command: Option<Command> = None;
    let mut out_dir = PathBuf::from(".");
    let mut seed: u64 = 0;

    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        let mut value = |name: &str| {
            args.next()
                .ok_or_else(|| Error::invalid(format!("{name} expects a value\n{USAGE}")))
        };
        match arg.as_str() {
            "--config" => config_path = Some(PathBuf::from(value("--config")?)),
            "--command" => command = Some(value("--command")?.parse()?),
            "--out" => out_dir = PathBuf::from(value("--out")?),
            "--seed" => {
                let raw = value("--seed")?;
                seed = raw.parse().map_err(|_| {
                    Error::invalid(format!("--seed expects an integer, got `{raw}`"))
                })?;
            }
            "--help" | "-h" => return Ok(format!("{USAGE}\n")),
            other => {
                return Err(Error::invalid(format!("unknown flag `{other}`\n{USAGE}")));
            }
        }
    }
    let config_path =
        config_path.ok_or_else(|| Error::invalid(format!("--config is required\n{USAGE}")))?;
    let command =
        command.ok_or_else(|| Error::invalid(format!("--command is required\n{USAGE}")))?;

    let config = load_config(&config_path)?;
    std::fs::create_dir_all(&out_dir)?;
    let output = run_command(&config, command, &out_dir, seed)?;
    Ok(output.summary)
}

/// Machine-readable error envelope printed on any failure.
fn error_json(e: &Error) -> String {
    let escape = |s: &str| -> String {
        let mut out = String::new();
        for c in s.chars() {
            match c {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
                c => out.push(c),
            }
        }
        out
    };
    format!(
        "{{\"error\": {{\"category\": \"{}\", \"message\": \"{}\"}}}}",
        e.category(),
        escape(&e.to_string())
    )
}
