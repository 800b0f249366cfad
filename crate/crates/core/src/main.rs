fn main() {
    std::process::exit(motifforge::cli::run());
}
