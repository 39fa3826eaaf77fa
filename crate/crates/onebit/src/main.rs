fn main() {
    std::process::exit(onebit::cli::main_with_args(std::env::args_os()));
}
