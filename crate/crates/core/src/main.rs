fn main() {
    std::process::exit(specdis::cli::run(std::env::args_os()));
}
