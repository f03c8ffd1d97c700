fn main() {
    std::process::exit(qsu2::cli::run(std::env::args_os()));
}
