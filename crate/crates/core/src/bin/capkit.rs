fn main() {
    std::process::exit(capkit::cli::run(std::env::args_os()));
}
