fn main() {
    std::process::exit(vbdist::cli::run(std::env::args_os()));
}
