fn main() {
    std::process::exit(qfi_dephase::cli::cli_main(std::env::args_os()));
}
