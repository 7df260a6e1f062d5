fn main() {
    std::process::exit(fracmech::cli::run());
}
