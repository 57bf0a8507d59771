fn main() {
    std::process::exit(qontinual::harness::cli::main_with_args(std::env::args_os()));
}
