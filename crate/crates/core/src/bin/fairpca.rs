fn main() {
    std::process::exit(fairpca::cli::run_from_args(std::env::args_os()));
}
