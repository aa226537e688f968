fn main() {
    std::process::exit(glidesim::scenario::cli_main(std::env::args_os()));
}
