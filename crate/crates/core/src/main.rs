fn main() {
    std::process::exit(pgn::cli::run(std::env::args_os()));
}
