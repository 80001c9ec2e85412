use std::process::ExitCode;

use clap::Parser;

use leolab_cli::{configure_threads, resolve_config, run, Cli, EXIT_VALIDATION};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|()| {
        let (command, args) = cli.command.split();
        run(&resolve_config(command, args)?)
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("leolab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
