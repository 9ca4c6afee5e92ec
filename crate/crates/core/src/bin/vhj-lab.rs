fn main() {
    std::process::exit(vhj_lab::cli::run_cli(std::env::args_os()));
}
