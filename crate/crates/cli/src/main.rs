fn main() {
    std::process::exit(ecodyn::run(std::env::args()));
}
