fn main() {
    std::process::exit(moralbench::cli::run_with_args(std::env::args_os()));
}
