fn main() {
    std::process::exit(anchorscan::cli::run(std::env::args_os()));
}
