fn main() {
    std::process::exit(graphtalk_cli::main_with(std::env::args_os()));
}
