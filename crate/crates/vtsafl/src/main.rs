fn main() {
    std::process::exit(vtsafl::cli::run(std::env::args_os()));
}
