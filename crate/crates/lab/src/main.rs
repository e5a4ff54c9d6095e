use clap::Parser;

use bec_lab::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let outcome = run(cli.subcommand, &cli.config, cli.out.as_deref(), cli.jobs);
    if let Some(dir) = &outcome.dir {
        eprintln!("artifacts: {}", dir.display());
    }
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    std::process::exit(outcome.exit_code);
}
