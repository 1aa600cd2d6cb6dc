fn main() {
    std::process::exit(heston_swift::harness::cli::run(std::env::args_os()));
}
