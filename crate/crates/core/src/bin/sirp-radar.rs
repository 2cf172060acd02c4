fn main() {
    std::process::exit(sirp_radar::cli::parse_and_dispatch(std::env::args_os()));
}
