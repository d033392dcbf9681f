use clap::Parser;

use qcsplab::cli::Cli;

fn main() {
    let cli = Cli::parse();
    match qcsplab::run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&err.error_object()).expect("errors serialize")
            );
            std::process::exit(2);
        }
    }
}
