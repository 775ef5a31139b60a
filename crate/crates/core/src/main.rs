fn main() {
    std::process::exit(jointseg::cli::main_with_args(std::env::args_os()));
}
