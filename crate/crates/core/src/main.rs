fn main() {
    std::process::exit(tripleseq::cli::main_with_args(std::env::args_os()));
}
