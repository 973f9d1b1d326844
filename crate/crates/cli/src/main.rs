use std::process::ExitCode;

use aptest_cli::{presets, run, Cli, CliError};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.list_presets {
        for p in presets::PRESET_NAMES {
            println!("{p}\n{p}-desk");
        }
        return ExitCode::SUCCESS;
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aptest: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let manifest = cli.manifest()?;
    if cli.dry_run {
        let json =
            serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        println!("{json}");
        return Ok(());
    }
    let outcome = run::run(&manifest)?;
    print!("{}", run::summary_table(&outcome));
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
