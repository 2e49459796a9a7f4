fn main() {
    std::process::exit(l2boost::cli::main_with_args(std::env::args_os()));
}
