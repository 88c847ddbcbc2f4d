fn main() {
    std::process::exit(hydroblow::cli::run(std::env::args_os()));
}
