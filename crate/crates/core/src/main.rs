fn main() {
    std::process::exit(fowler_shoot::cli::run());
}
