fn main() {
    std::process::exit(asclt::cli::run(std::env::args_os()));
}
