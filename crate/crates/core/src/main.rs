fn main() {
    std::process::exit(sgfb::cli::main_with_args(std::env::args_os()));
}
