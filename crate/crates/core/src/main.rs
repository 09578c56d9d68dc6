fn main() {
    std::process::exit(unmix::cli::run(std::env::args_os()));
}
