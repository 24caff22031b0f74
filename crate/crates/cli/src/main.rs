mod config;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "spherecong", about = "Conformal surface analysis and dual construction")]
struct Args {
    /// analyze | dual | verify | classify | gallery | export
    command: String,
    /// Job description (JSON, schema 1)
    #[arg(long)]
    config: std::path::PathBuf,
    /// Cap worker threads; results are independent of this
    #[arg(long)]
    threads: Option<usize>,
    /// Override the output directory from the config
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run::run(&args.command, &args.config, args.threads, args.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_stderr_json());
            ExitCode::from(err.exit_code())
        }
    }
}
