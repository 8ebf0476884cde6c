fn main() {
    std::process::exit(aurc::cli::run(std::env::args_os()));
}
