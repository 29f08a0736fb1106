fn main() {
    std::process::exit(fep::cli::main_with_args(std::env::args_os()));
}
