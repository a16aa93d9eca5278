fn main() {
    std::process::exit(releq::cli::run(std::env::args_os()));
}
