fn main() {
    std::process::exit(prismkit::run_cli());
}
