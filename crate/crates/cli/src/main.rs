fn main() {
    std::process::exit(prodsum_cli::main_with_args(std::env::args_os()));
}
