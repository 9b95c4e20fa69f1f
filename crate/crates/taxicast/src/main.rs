fn main() {
    std::process::exit(taxicast::cli::main_with_args(std::env::args_os()));
}
