fn main() {
    std::process::exit(crslab::cli::run_command(std::env::args_os()));
}
