fn main() {
    std::process::exit(rmhd_sonic::cli::main_with(std::env::args_os()));
}
