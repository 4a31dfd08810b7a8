fn main() {
    std::process::exit(dpsm::cli::main_with_args(std::env::args_os()));
}
