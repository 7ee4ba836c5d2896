fn main() {
    std::process::exit(stopkit::cli::main());
}
