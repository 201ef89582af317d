fn main() {
    std::process::exit(supermap_cli::run(std::env::args_os()));
}
