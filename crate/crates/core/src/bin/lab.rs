fn main() {
    std::process::exit(chernlab::cli::main_with_args(std::env::args_os()));
}
