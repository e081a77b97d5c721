fn main() {
    std::process::exit(credal::cli::main());
}
