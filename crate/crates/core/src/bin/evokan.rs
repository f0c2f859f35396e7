fn main() {
    std::process::exit(evokan::cli::main_with_args(std::env::args_os()));
}
