fn main() {
    std::process::exit(procmod::cli::run(std::env::args_os()));
}
