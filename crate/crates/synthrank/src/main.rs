fn main() {
    std::process::exit(synthrank::run_from_args());
}
