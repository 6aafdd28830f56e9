fn main() {
    std::process::exit(sc_percolation::cli::main_with_args(std::env::args_os()));
}
