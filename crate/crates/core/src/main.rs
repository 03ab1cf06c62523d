fn main() {
    std::process::exit(kinelab::cli::run(std::env::args_os()));
}
