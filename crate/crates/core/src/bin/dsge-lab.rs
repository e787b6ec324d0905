fn main() {
    std::process::exit(dsge_lab::cli::main_with_args(std::env::args_os()));
}
