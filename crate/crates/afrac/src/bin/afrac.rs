fn main() {
    std::process::exit(afrac::cli::run(std::env::args_os()));
}
