fn main() {
    std::process::exit(bimq::cli::main_with(std::env::args_os()));
}
