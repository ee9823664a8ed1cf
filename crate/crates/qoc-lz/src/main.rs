fn main() {
    std::process::exit(qoc_lz::cli::run());
}
