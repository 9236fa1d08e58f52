fn main() {
    std::process::exit(cavity_rwa::cli::parse_and_dispatch(std::env::args_os()));
}
