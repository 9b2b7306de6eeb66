fn main() {
    let code = logdiff_core::cli::run(std::env::args_os());
    std::process::exit(code);
}
