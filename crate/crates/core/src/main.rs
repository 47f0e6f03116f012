use clap::Parser;

fn main() {
    let cli = bernoulli_lab::cli::Cli::parse();
    std::process::exit(bernoulli_lab::cli::run(cli));
}
