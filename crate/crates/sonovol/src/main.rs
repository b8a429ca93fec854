fn main() {
    std::process::exit(sonovol::cli::run());
}
