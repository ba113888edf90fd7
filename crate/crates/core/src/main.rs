fn main() {
    std::process::exit(wcascade::cli::run(std::env::args_os()));
}
