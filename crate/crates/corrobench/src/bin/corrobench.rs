fn main() {
    std::process::exit(corrobench::cli::run());
}
