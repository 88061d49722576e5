fn main() {
    std::process::exit(traitstat_cli::run(std::env::args_os()));
}
