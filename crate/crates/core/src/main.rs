fn main() {
    std::process::exit(isocubic::cli::run(std::env::args_os()));
}
