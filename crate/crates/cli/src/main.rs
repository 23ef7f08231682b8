fn main() {
    std::process::exit(opinion_cli::run());
}
