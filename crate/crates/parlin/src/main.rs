fn main() {
    std::process::exit(parlin::cli::run(std::env::args_os()));
}
