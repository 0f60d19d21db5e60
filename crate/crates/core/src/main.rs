use clap::Parser;

fn main() {
    std::process::exit(dmu::cli::main_with_args(dmu::cli::Args::parse()));
}
