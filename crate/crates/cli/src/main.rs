use std::process::ExitCode;

use clap::Parser;
use sparse_recover_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = cli.into_spec().and_then(|spec| run(&spec));
    match outcome {
        Ok(output) => {
            for line in &output.report {
                println!("{line}");
            }
            println!("wrote {} and {}", output.table_path.display(), output.summary_path.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
