fn main() {
    std::process::exit(trellis::cli::run(std::env::args_os()));
}
