fn main() {
    std::process::exit(dimkit::cli::run(std::env::args_os()));
}
