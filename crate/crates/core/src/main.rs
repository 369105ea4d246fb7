fn main() {
    std::process::exit(expweight_core::cli::cli_main(std::env::args_os()));
}
