use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = <fraudlens::commands::Cli as clap::Parser>::parse();
    match fraudlens::commands::dispatch(&cli.command, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
