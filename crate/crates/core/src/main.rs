use std::io::Write;

use clap::Parser;
use sspec_core::cli::{run, to_json_string, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        // a closed stdout (e.g. piped into `head`) is not an error
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
        Err(e) => {
            let _ = std::io::stderr().write_all(to_json_string(&e.diagnostic()).as_bytes());
            std::process::exit(e.exit_code());
        }
    }
}
