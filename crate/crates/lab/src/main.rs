use clap::Parser;
use dispersive_lab::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let code = dispatch(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
