fn main() {
    std::process::exit(y00_cli::run(std::env::args_os()));
}
