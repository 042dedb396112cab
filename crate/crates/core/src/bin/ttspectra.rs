fn main() {
    std::process::exit(ttspectra::cli::run(std::env::args_os()));
}
