fn main() {
    std::process::exit(fairconf::cli::run(std::env::args_os()));
}
