fn main() {
    std::process::exit(regime::cli::run(std::env::args_os()));
}
