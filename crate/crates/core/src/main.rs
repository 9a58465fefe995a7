fn main() {
    std::process::exit(kcenter::cli::run(std::env::args_os()));
}
