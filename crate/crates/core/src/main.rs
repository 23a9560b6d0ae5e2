fn main() {
    std::process::exit(sigbandit::cli::main_with_args(std::env::args_os()));
}
