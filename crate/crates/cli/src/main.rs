fn main() {
    std::process::exit(sbm_pcc_cli::run_from(std::env::args_os()));
}
