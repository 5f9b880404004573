fn main() {
    std::process::exit(spinmirror::cli::run(std::env::args_os()));
}
