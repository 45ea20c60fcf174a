use clap::Parser;

use limeout::cli::{run, Cli};
use limeout::Error;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::Config { .. } | Error::Argument(_) => 2,
            _ => 1,
        };
        std::process::exit(code);
    }
}
