fn main() {
    std::process::exit(unidial::cli::run(std::env::args_os()));
}
