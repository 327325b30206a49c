fn main() {
    std::process::exit(moment_ansatz::cli::run(std::env::args_os()));
}
