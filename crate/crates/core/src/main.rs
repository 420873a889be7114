fn main() {
    std::process::exit(pinwheel::cli::run(std::env::args_os()));
}
