use std::process;

fn main() {
    process::exit(matchkast::cli::run(std::env::args_os()));
}
