fn main() {
    std::process::exit(sarc_cli::run(std::env::args_os()));
}
