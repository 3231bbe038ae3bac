use clap::Parser;

use chasles_core::labcli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
