use clap::Parser;
use transop_cli::args::Cli;
use transop_cli::{configure_threads, run};

fn main() {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            std::process::exit(outcome.code);
        }
        Err(e) => {
            eprintln!("transop: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
