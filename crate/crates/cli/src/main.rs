fn main() {
    std::process::exit(aperiodica_cli::run(std::env::args_os()));
}
