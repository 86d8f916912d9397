fn main() {
    std::process::exit(qdspin_cli::run(std::env::args_os()));
}
