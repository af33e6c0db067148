fn main() {
    std::process::exit(oed_core::cli::run_from(std::env::args_os()));
}
