fn main() {
    std::process::exit(pothole_core::cli::run_cli(std::env::args_os()));
}
