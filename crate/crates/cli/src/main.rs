fn main() {
    std::process::exit(wignerkit_cli::run(std::env::args_os()));
}
