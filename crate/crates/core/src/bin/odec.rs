fn main() {
    std::process::exit(odec::harness::cli::run(std::env::args_os()));
}
