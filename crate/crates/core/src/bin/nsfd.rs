fn main() {
    std::process::exit(nsfd::cli::run(std::env::args_os()));
}
