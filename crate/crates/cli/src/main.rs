use std::process::ExitCode;

use campaign_eval_cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let result = Cli::parse().resolve().and_then(|job| {
        let files = execute(&job)?;
        println!("wrote {} files under {}", files.len(), job.config.output_dir().display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("campaign-eval: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
