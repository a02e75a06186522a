fn main() {
    std::process::exit(lls_core::cli::main_with_args(std::env::args_os()));
}
