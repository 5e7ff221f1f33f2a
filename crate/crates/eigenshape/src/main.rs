fn main() {
    std::process::exit(eigenshape::cli::run(std::env::args_os()));
}
