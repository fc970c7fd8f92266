fn main() {
    std::process::exit(zerovar::cli::main_with_args(std::env::args_os()));
}
