fn main() {
    std::process::exit(lightning_laplace::cli::run(std::env::args_os()));
}
