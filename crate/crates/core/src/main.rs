use clap::Parser;
use diamag::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
