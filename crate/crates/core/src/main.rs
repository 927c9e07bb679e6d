fn main() {
    std::process::exit(lpi_core::cli::run(std::env::args()));
}
