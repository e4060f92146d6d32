fn main() {
    std::process::exit(nomafd::cli::main_from_args());
}
