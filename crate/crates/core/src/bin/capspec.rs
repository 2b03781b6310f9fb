fn main() {
    std::process::exit(capspec::cli::run(std::env::args_os()));
}
