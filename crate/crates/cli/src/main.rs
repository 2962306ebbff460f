mod args;
mod run;

use args::{Cli, Format};
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> run::CliResult<()> {
    let cfg = run::load_config(&cli.global)?;
    let report = run::run(&cli.command, &cfg)?;
    let summary = serde_json::to_string_pretty(&run::summary(&report, &cfg)).expect("summary serializes");
    match &cfg.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
            for (ext, body) in [("json", &summary), ("csv", &report.csv)] {
                let path = dir.join(format!("{}.{ext}", report.name));
                std::fs::write(&path, body).map_err(|e| format!("writing {}: {e}", path.display()))?;
                log::info!("wrote {}", path.display());
            }
        }
        None => match cli.global.format {
            Format::Json => println!("{summary}"),
            Format::Csv => print!("{}", report.csv),
        },
    }
    Ok(())
}
