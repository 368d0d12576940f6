fn main() {
    let code = chamberflow::cli::run(std::env::args_os());
    std::process::exit(code);
}
