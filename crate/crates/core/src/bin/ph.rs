fn main() {
    std::process::exit(ph_core::cli::main_with_args(std::env::args_os()));
}
