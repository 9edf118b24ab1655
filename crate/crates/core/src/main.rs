fn main() {
    std::process::exit(manifoldwalk::cli::run(std::env::args_os()));
}
