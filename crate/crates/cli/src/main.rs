use clap::Parser;

use phasekit_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(notes) => {
            for n in notes {
                eprintln!("skipped: {n}");
            }
        }
        Err(e) => {
            eprintln!("phasekit: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
