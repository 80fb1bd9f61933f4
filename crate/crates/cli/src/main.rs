fn main() {
    std::process::exit(temport_cli::run(std::env::args_os()));
}
