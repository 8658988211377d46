fn main() {
    std::process::exit(akl::cli::run(std::env::args()));
}
