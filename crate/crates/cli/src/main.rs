fn main() {
    std::process::exit(ustlab_cli::main_with_args(std::env::args_os()));
}
