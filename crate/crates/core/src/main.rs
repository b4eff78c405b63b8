use clap::Parser;

fn main() {
    std::process::exit(qnls::cli::main_with(qnls::cli::Args::parse()));
}
