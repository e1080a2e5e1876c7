fn main() {
    std::process::exit(relaynet_cli::app::main_with_args(std::env::args_os()));
}
