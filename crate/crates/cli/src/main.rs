fn main() {
    std::process::exit(nesteq_cli::run_command(std::env::args_os()));
}
