use clap::Parser;

fn main() {
    let args = repp_lab::cli::Args::parse();
    std::process::exit(repp_lab::cli::run(args));
}
