fn main() {
    std::process::exit(powerwalk::cli::main_with_args(std::env::args().collect()));
}
