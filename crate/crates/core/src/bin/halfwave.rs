fn main() {
    std::process::exit(halfwave::experiments::cli::main_with_args(std::env::args_os()));
}
