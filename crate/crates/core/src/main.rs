fn main() {
    std::process::exit(spi_core::harness::cli::cli_main(std::env::args_os()));
}
