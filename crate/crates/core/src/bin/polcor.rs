fn main() {
    std::process::exit(polcor::cli::main_with(std::env::args_os()));
}
