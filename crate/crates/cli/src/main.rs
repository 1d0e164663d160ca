fn main() {
    std::process::exit(dispersio_cli::main_with(std::env::args_os()));
}
