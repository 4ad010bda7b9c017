fn main() {
    std::process::exit(vamo_cli::main_with_args(std::env::args_os()));
}
