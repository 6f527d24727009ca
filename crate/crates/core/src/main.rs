use clap::Parser;

fn main() {
    let args = mtdisc::cli::Args::parse();
    std::process::exit(mtdisc::cli::main_with(&args));
}
