fn main() {
    std::process::exit(touchcap::cli::main_with_args(std::env::args_os()));
}
