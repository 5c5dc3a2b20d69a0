fn main() {
    std::process::exit(rankhier::cli::main_from(std::env::args_os()));
}
