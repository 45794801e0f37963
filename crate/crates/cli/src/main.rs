fn main() {
    std::process::exit(sensus::run_from_args(std::env::args_os()));
}
