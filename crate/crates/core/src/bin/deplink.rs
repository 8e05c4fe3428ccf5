fn main() {
    std::process::exit(deplink::cli::run(std::env::args_os()));
}
