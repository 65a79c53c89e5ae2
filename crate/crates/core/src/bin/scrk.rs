fn main() {
    std::process::exit(scrk::cli::main());
}
