fn main() {
    std::process::exit(stein_bounds_cli::run(std::env::args_os()));
}
