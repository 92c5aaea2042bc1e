fn main() {
    std::process::exit(snsng::cli::run(std::env::args_os()));
}
